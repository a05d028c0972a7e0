#include "eitmech/config.hpp"
#include "eitmech/errors.hpp"

#include <algorithm>
#include <cctype>

namespace eitmech {

namespace {

std::string trim(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

} // namespace

bool RawDoc::has(const std::string& section, const std::string& key) const {
    return find(section, key) != nullptr;
}

const RawEntry* RawDoc::find(const std::string& section, const std::string& key) const {
    auto s = sections.find(section);
    if (s == sections.end()) return nullptr;
    auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
}

void RawDoc::set(const std::string& section, const std::string& key, const std::string& value,
                 int line) {
    sections[section][key] = RawEntry{value, line};
}

void RawDoc::set_path(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ValidationError("override '" + assignment + "': expected section.key=value");
    const std::string path = trim(assignment.substr(0, eq));
    const std::string value = trim(assignment.substr(eq + 1));
    const auto dot = path.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == path.size())
        throw ValidationError("override '" + assignment + "': key must be section.key");
    set(path.substr(0, dot), path.substr(dot + 1), value, 0);
}

RawDoc parse_document(const std::string& text) {
    RawDoc doc;
    std::string section;
    int line_no = 0;
    size_t pos = 0;
    while (pos <= text.size()) {
        const size_t nl = text.find('\n', pos);
        std::string line = text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
        pos = (nl == std::string::npos) ? text.size() + 1 : nl + 1;
        ++line_no;

        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']')
                throw ValidationError("config line " + std::to_string(line_no) +
                                      ": malformed section header '" + line + "'");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw ValidationError("config line " + std::to_string(line_no) +
                                      ": empty section name");
            doc.sections[section]; // record even if empty
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError("config line " + std::to_string(line_no) +
                                  ": expected 'key = value', got '" + line + "'");
        if (section.empty())
            throw ValidationError("config line " + std::to_string(line_no) +
                                  ": key outside of any [section]");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ValidationError("config line " + std::to_string(line_no) +
                                  ": empty key or value");
        doc.set(section, key, value, line_no);
    }
    return doc;
}

} // namespace eitmech
