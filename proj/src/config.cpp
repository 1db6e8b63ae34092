#include "smplmmse/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "smplmmse/errors.hpp"

namespace smplmmse {

namespace {

std::string trim(std::string_view s) {
    std::size_t a = 0;
    std::size_t b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
}

/// Drops a trailing '#' comment that is not inside a string.
std::string strip_comment(const std::string& line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') quoted = !quoted;
        if (line[i] == '#' && !quoted) return line.substr(0, i);
    }
    return line;
}

bool is_identifier(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-' && c != '.') return false;
    }
    return true;
}

class ValueParser {
public:
    ValueParser(std::string_view text, int line) : text_(text), line_(line) {}

    ConfigValue parse_all() {
        ConfigValue v = parse_value();
        skip_space();
        if (pos_ != text_.size()) fail("trailing characters after value");
        return v;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw ConfigError("config line " + std::to_string(line_) + ": " + what);
    }

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    ConfigValue parse_value() {
        skip_space();
        if (pos_ >= text_.size()) fail("missing value");
        const char c = text_[pos_];
        if (c == '"') return parse_string();
        if (c == '[') return parse_array();
        return parse_scalar();
    }

    ConfigValue parse_string() {
        ++pos_;
        ConfigValue v;
        v.type = ConfigValue::Type::String;
        while (pos_ < text_.size() && text_[pos_] != '"') {
            if (text_[pos_] == '\\' && pos_ + 1 < text_.size()) ++pos_;
            v.text.push_back(text_[pos_++]);
        }
        if (pos_ >= text_.size()) fail("unterminated string");
        ++pos_;
        return v;
    }

    ConfigValue parse_array() {
        ++pos_;
        ConfigValue v;
        v.type = ConfigValue::Type::Array;
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == ']') {
            ++pos_;
            return v;
        }
        while (true) {
            ConfigValue item = parse_value();
            if (item.type == ConfigValue::Type::Array) fail("nested arrays are not supported");
            v.items.push_back(std::move(item));
            skip_space();
            if (pos_ >= text_.size()) fail("unterminated array");
            if (text_[pos_] == ',') {
                ++pos_;
                skip_space();
                if (pos_ < text_.size() && text_[pos_] == ']') {
                    ++pos_;
                    return v;
                }
                continue;
            }
            if (text_[pos_] == ']') {
                ++pos_;
                return v;
            }
            fail("expected ',' or ']' in array");
        }
    }

    ConfigValue parse_scalar() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && text_[pos_] != ',' && text_[pos_] != ']' &&
               !std::isspace(static_cast<unsigned char>(text_[pos_]))) {
            ++pos_;
        }
        const std::string token(text_.substr(start, pos_ - start));
        ConfigValue v;
        if (token == "true" || token == "false") {
            v.type = ConfigValue::Type::Bool;
            v.flag = token == "true";
            v.text = token;
            return v;
        }
        double probe = 0.0;
        const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), probe);
        if (ec != std::errc() || ptr != token.data() + token.size()) fail("invalid value '" + token + "'");
        v.type = ConfigValue::Type::Number;
        v.text = token;
        return v;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    int line_;
};

const char* type_name(ConfigValue::Type t) {
    switch (t) {
        case ConfigValue::Type::Bool: return "boolean";
        case ConfigValue::Type::Number: return "number";
        case ConfigValue::Type::String: return "string";
        case ConfigValue::Type::Array: return "array";
    }
    return "value";
}

double to_double(const ConfigValue& v, const std::string& key) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.text.data(), v.text.data() + v.text.size(), out);
    if (ec != std::errc() || ptr != v.text.data() + v.text.size()) {
        throw ConfigError("config key '" + key + "': invalid number");
    }
    return out;
}

}  // namespace

ConfigDocument ConfigDocument::parse(const std::string& text) {
    ConfigDocument doc;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("config line " + std::to_string(line_no) + ": bad section header");
            section = trim(std::string_view(line).substr(1, line.size() - 2));
            if (!is_identifier(section)) {
                throw ConfigError("config line " + std::to_string(line_no) + ": bad section name");
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        if (!is_identifier(key)) throw ConfigError("config line " + std::to_string(line_no) + ": bad key '" + key + "'");
        const std::string full = section.empty() ? key : section + "." + key;
        if (doc.values_.contains(full)) {
            throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" + full + "'");
        }
        doc.values_[full] = ValueParser(std::string_view(line).substr(eq + 1), line_no).parse_all();
    }
    return doc;
}

ConfigDocument ConfigDocument::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config not found: '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

std::vector<std::string> ConfigDocument::keys() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_) out.push_back(k);
    return out;
}

const ConfigValue& ConfigDocument::at(const std::string& key, ConfigValue::Type type) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("config key '" + key + "' is missing");
    if (it->second.type != type) {
        throw ConfigError("config key '" + key + "' must be a " + type_name(type));
    }
    return it->second;
}

double ConfigDocument::number(const std::string& key) const {
    return to_double(at(key, ConfigValue::Type::Number), key);
}

std::int64_t ConfigDocument::integer(const std::string& key) const {
    const auto& v = at(key, ConfigValue::Type::Number);
    std::int64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.text.data(), v.text.data() + v.text.size(), out);
    if (ec != std::errc() || ptr != v.text.data() + v.text.size()) {
        throw ConfigError("config key '" + key + "' must be an integer");
    }
    return out;
}

std::uint64_t ConfigDocument::unsigned_integer(const std::string& key) const {
    const auto& v = at(key, ConfigValue::Type::Number);
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.text.data(), v.text.data() + v.text.size(), out);
    if (ec != std::errc() || ptr != v.text.data() + v.text.size()) {
        throw ConfigError("config key '" + key + "' must be a non-negative integer");
    }
    return out;
}

bool ConfigDocument::boolean(const std::string& key) const { return at(key, ConfigValue::Type::Bool).flag; }

std::string ConfigDocument::string(const std::string& key) const { return at(key, ConfigValue::Type::String).text; }

std::vector<double> ConfigDocument::number_list(const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : at(key, ConfigValue::Type::Array).items) {
        if (item.type != ConfigValue::Type::Number) throw ConfigError("config key '" + key + "' must hold numbers");
        out.push_back(to_double(item, key));
    }
    return out;
}

std::vector<std::string> ConfigDocument::string_list(const std::string& key) const {
    std::vector<std::string> out;
    for (const auto& item : at(key, ConfigValue::Type::Array).items) {
        if (item.type != ConfigValue::Type::String) throw ConfigError("config key '" + key + "' must hold strings");
        out.push_back(item.text);
    }
    return out;
}

}  // namespace smplmmse
