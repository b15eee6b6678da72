#include "config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace kmx::tools {

namespace {

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

double parse_double(const std::string& key, const std::string& v) {
    double x = 0.0;
    auto res = std::from_chars(v.data(), v.data() + v.size(), x);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size())
        throw std::invalid_argument("setting " + key + ": not a number: " + v);
    return x;
}

}  // namespace

Config Config::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_text(ss.str(), path);
}

Config Config::from_text(std::string_view text, const std::string& origin) {
    Config c;
    int line_no = 0;
    std::istringstream in{std::string(text)};
    for (std::string line; std::getline(in, line);) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.find('=') == std::string::npos)
            throw std::invalid_argument(origin + ":" + std::to_string(line_no) + ": expected key=value");
        c.set(t);
    }
    return c;
}

void Config::set(const std::string& assignment) {
    auto eq = assignment.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("expected key=value, got " + assignment);
    std::string key = trim(std::string_view(assignment).substr(0, eq));
    if (key.empty()) throw std::invalid_argument("empty key in " + assignment);
    values_[key] = trim(std::string_view(assignment).substr(eq + 1));
}

void Config::merge(const Config& other) {
    for (const auto& [k, v] : other.values_) values_[k] = v;
}

std::string Config::text(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    read_[key] = true;
    return it->second;
}

double Config::number(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    read_[key] = true;
    return parse_double(key, it->second);
}

double Config::number(const std::string& key) const {
    if (!has(key)) throw std::invalid_argument("missing setting " + key);
    return number(key, 0.0);
}

long long Config::integer(const std::string& key, long long fallback) const {
    double x = number(key, static_cast<double>(fallback));
    if (x != static_cast<double>(static_cast<long long>(x)))
        throw std::invalid_argument("setting " + key + ": not an integer");
    return static_cast<long long>(x);
}

std::vector<double> Config::numbers(const std::string& key, std::vector<double> fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    read_[key] = true;
    std::vector<double> out;
    std::stringstream ss(it->second);
    for (std::string item; std::getline(ss, item, ',');) out.push_back(parse_double(key, trim(item)));
    if (out.empty()) throw std::invalid_argument("setting " + key + ": empty list");
    return out;
}

std::vector<std::string> Config::unused() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_)
        if (!read_.count(k)) out.push_back(k);
    return out;
}

}  // namespace kmx::tools
