#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace kmx::tools {

// Flat key=value settings. Blank lines and lines starting with '#' are
// ignored; later assignments override earlier ones.
class Config {
public:
    static Config from_file(const std::string& path);
    static Config from_text(std::string_view text, const std::string& origin = "<text>");

    void set(const std::string& assignment);  // "key=value"
    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    void merge(const Config& other);

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    std::string text(const std::string& key, const std::string& fallback) const;
    double number(const std::string& key, double fallback) const;
    double number(const std::string& key) const;  // throws if absent
    long long integer(const std::string& key, long long fallback) const;
    std::vector<double> numbers(const std::string& key, std::vector<double> fallback) const;  // comma separated

    const std::map<std::string, std::string>& values() const { return values_; }

    // Keys that were never read; used to reject typos.
    std::vector<std::string> unused() const;

private:
    std::map<std::string, std::string> values_;
    mutable std::map<std::string, bool> read_;
};

}  // namespace kmx::tools
