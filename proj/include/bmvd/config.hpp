#pragma once

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace bmvd {

// Key = value sections, '#' or ';' comments.
class IniConfig {
  public:
    static IniConfig parse(const std::string& text) {
        IniConfig c;
        c.raw_ = text;
        std::istringstream in(text);
        std::string line, section;
        while (std::getline(in, line)) {
            const auto hash = line.find_first_of("#;");
            if (hash != std::string::npos) line.erase(hash);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[' && line.back() == ']') {
                section = trim(line.substr(1, line.size() - 2));
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw std::runtime_error("config: expected key = value, got '" + line + "'");
            const std::string key = trim(line.substr(0, eq));
            const std::string val = trim(line.substr(eq + 1));
            c.values_[section + "." + key] = val;
        }
        return c;
    }

    static IniConfig load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("config: cannot open " + path);
        std::ostringstream ss;
        ss << in.rdbuf();
        return parse(ss.str());
    }

    bool has(const std::string& section, const std::string& key) const {
        return values_.count(section + "." + key) > 0;
    }

    std::string get_str(const std::string& section, const std::string& key,
                        const std::string& fallback = "") const {
        const auto it = values_.find(section + "." + key);
        return it == values_.end() ? fallback : it->second;
    }

    double get_num(const std::string& section, const std::string& key, double fallback) const {
        const auto it = values_.find(section + "." + key);
        return it == values_.end() ? fallback : std::stod(it->second);
    }

    long get_int(const std::string& section, const std::string& key, long fallback) const {
        const auto it = values_.find(section + "." + key);
        return it == values_.end() ? fallback : std::stol(it->second);
    }

    std::vector<double> get_list(const std::string& section, const std::string& key,
                                 std::vector<double> fallback = {}) const {
        const auto it = values_.find(section + "." + key);
        if (it == values_.end()) return fallback;
        std::vector<double> out;
        std::string item;
        std::istringstream ss(it->second);
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (!item.empty()) out.push_back(std::stod(item));
        }
        return out;
    }

    const std::string& raw() const { return raw_; }
    const std::map<std::string, std::string>& values() const { return values_; }

  private:
    static std::string trim(const std::string& s) {
        const auto a = s.find_first_not_of(" \t\r\n");
        if (a == std::string::npos) return "";
        const auto b = s.find_last_not_of(" \t\r\n");
        return s.substr(a, b - a + 1);
    }

    std::map<std::string, std::string> values_;
    std::string raw_;
};

namespace detail {

inline uint32_t rotl32(uint32_t v, int s) { return (v << s) | (v >> (32 - s)); }

}  // namespace detail

// SHA-1 digest, hex-encoded.
inline std::string sha1_hex(const std::string& data) {
    uint32_t h[5] = {0x67452301u, 0xEFCDAB89u, 0x98BADCFEu, 0x10325476u, 0xC3D2E1F0u};
    std::string msg = data;
    const uint64_t bits = static_cast<uint64_t>(data.size()) * 8;
    msg.push_back(static_cast<char>(0x80));
    while (msg.size() % 64 != 56) msg.push_back('\0');
    for (int i = 7; i >= 0; --i) msg.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));

    for (size_t off = 0; off < msg.size(); off += 64) {
        uint32_t w[80];
        for (int i = 0; i < 16; ++i) {
            w[i] = (static_cast<uint8_t>(msg[off + 4 * i]) << 24) |
                   (static_cast<uint8_t>(msg[off + 4 * i + 1]) << 16) |
                   (static_cast<uint8_t>(msg[off + 4 * i + 2]) << 8) |
                   static_cast<uint8_t>(msg[off + 4 * i + 3]);
        }
        for (int i = 16; i < 80; ++i)
            w[i] = detail::rotl32(w[i - 3] ^ w[i - 8] ^ w[i - 14] ^ w[i - 16], 1);
        uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4];
        for (int i = 0; i < 80; ++i) {
            uint32_t f, k;
            if (i < 20) {
                f = (b & c) | (~b & d);
                k = 0x5A827999u;
            } else if (i < 40) {
                f = b ^ c ^ d;
                k = 0x6ED9EBA1u;
            } else if (i < 60) {
                f = (b & c) | (b & d) | (c & d);
                k = 0x8F1BBCDCu;
            } else {
                f = b ^ c ^ d;
                k = 0xCA62C1D6u;
            }
            const uint32_t tmp = detail::rotl32(a, 5) + f + e + k + w[i];
            e = d;
            d = c;
            c = detail::rotl32(b, 30);
            b = a;
            a = tmp;
        }
        h[0] += a;
        h[1] += b;
        h[2] += c;
        h[3] += d;
        h[4] += e;
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (uint32_t v : h)
        for (int i = 7; i >= 0; --i) out.push_back(hex[(v >> (4 * i)) & 0xF]);
    return out;
}

// Hash of the config text the way git hashes a blob.
inline std::string config_content_hash(const std::string& text) {
    return sha1_hex("blob " + std::to_string(text.size()) + '\0' + text);
}

// Environment overrides; only the RNG seed and the Monte Carlo budget may be
// overridden outside the config file.
inline uint64_t env_seed_override(uint64_t fallback) {
    if (const char* s = std::getenv("BMVD_SEED")) return std::strtoull(s, nullptr, 10);
    return fallback;
}

inline size_t env_budget_override(size_t fallback) {
    if (const char* s = std::getenv("BMVD_MC_PATHS")) return std::strtoull(s, nullptr, 10);
    return fallback;
}

}  // namespace bmvd
