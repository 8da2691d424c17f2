#include "normnet/toml_lite.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace normnet {

namespace {

[[noreturn]] void fail(std::size_t line, const std::string& what) {
    throw std::runtime_error("toml parse error at line " + std::to_string(line) + ": " + what);
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

// strips a trailing comment that is not inside a string
std::string_view strip_comment(std::string_view s) {
    bool in_string = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (c == '"' && (i == 0 || s[i - 1] != '\\')) in_string = !in_string;
        if (c == '#' && !in_string) return s.substr(0, i);
    }
    return s;
}

std::string parse_string(std::string_view v, std::size_t line) {
    if (v.size() < 2 || v.front() != '"' || v.back() != '"') fail(line, "malformed string");
    std::string out;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
        char c = v[i];
        if (c == '\\' && i + 2 < v.size()) {
            char n = v[++i];
            switch (n) {
                case 'n': out.push_back('\n'); break;
                case 't': out.push_back('\t'); break;
                case '"': out.push_back('"'); break;
                case '\\': out.push_back('\\'); break;
                default: fail(line, "unsupported escape");
            }
        } else {
            out.push_back(c);
        }
    }
    return out;
}

nlohmann::json parse_scalar(std::string_view v, std::size_t line) {
    v = trim(v);
    if (v.empty()) fail(line, "empty value");
    if (v.front() == '"') return parse_string(v, line);
    if (v == "true") return true;
    if (v == "false") return false;
    std::string text(v);
    bool looks_float = text.find_first_of(".eE") != std::string::npos;
    try {
        std::size_t used = 0;
        if (looks_float) {
            double d = std::stod(text, &used);
            if (used != text.size()) fail(line, "trailing characters after number");
            return d;
        }
        long long i = std::stoll(text, &used);
        if (used != text.size()) fail(line, "trailing characters after number");
        return i;
    } catch (const std::exception&) {
        fail(line, "cannot parse value '" + text + "'");
    }
}

nlohmann::json parse_value(std::string_view v, std::size_t line) {
    v = trim(v);
    if (!v.empty() && v.front() == '[') {
        if (v.back() != ']') fail(line, "unterminated array");
        nlohmann::json arr = nlohmann::json::array();
        std::string_view body = v.substr(1, v.size() - 2);
        std::size_t start = 0;
        bool in_string = false;
        for (std::size_t i = 0; i <= body.size(); ++i) {
            bool at_end = i == body.size();
            char c = at_end ? ',' : body[i];
            if (!at_end && c == '"' && (i == 0 || body[i - 1] != '\\')) in_string = !in_string;
            if (c == ',' && !in_string) {
                std::string_view item = trim(body.substr(start, i - start));
                if (!item.empty()) arr.push_back(parse_scalar(item, line));
                start = i + 1;
            }
        }
        return arr;
    }
    return parse_scalar(v, line);
}

bool valid_key(std::string_view k) {
    if (k.empty()) return false;
    for (char c : k)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') return false;
    return true;
}

}  // namespace

nlohmann::json parse_toml_lite(const std::string& text) {
    nlohmann::json root = nlohmann::json::object();
    nlohmann::json* table = &root;
    std::istringstream stream(text);
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(stream, raw)) {
        ++line_no;
        std::string_view line = trim(strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail(line_no, "unterminated table header");
            std::string_view path = trim(line.substr(1, line.size() - 2));
            table = &root;
            std::size_t start = 0;
            while (start <= path.size()) {
                std::size_t dot = path.find('.', start);
                std::string_view part =
                    trim(path.substr(start, dot == std::string_view::npos ? path.size() - start
                                                                          : dot - start));
                if (!valid_key(part)) fail(line_no, "bad table name");
                table = &(*table)[std::string(part)];
                if (!table->is_object()) *table = nlohmann::json::object();
                if (dot == std::string_view::npos) break;
                start = dot + 1;
            }
            continue;
        }
        std::size_t eq = std::string_view::npos;
        bool in_string = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            char c = line[i];
            if (c == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
            if (c == '=' && !in_string) {
                eq = i;
                break;
            }
        }
        if (eq == std::string_view::npos) fail(line_no, "expected key = value");
        std::string_view key = trim(line.substr(0, eq));
        if (!valid_key(key)) fail(line_no, "bad key '" + std::string(key) + "'");
        (*table)[std::string(key)] = parse_value(line.substr(eq + 1), line_no);
    }
    return root;
}

nlohmann::json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".toml")
        return parse_toml_lite(buf.str());
    return nlohmann::json::parse(buf.str());
}

}  // namespace normnet
