#pragma once

#include <map>
#include <string>
#include <vector>

namespace eitmech {

// Raw INI-style document: flat sections, key = value lines, '#'/';' comments.
// Keeps source line numbers so load errors can point at the offending entry.
struct RawEntry {
    std::string value;
    int line = 0; // 0 means "not from the file" (override or default)
};

struct RawDoc {
    // section -> key -> entry
    std::map<std::string, std::map<std::string, RawEntry>> sections;

    bool has(const std::string& section, const std::string& key) const;
    const RawEntry* find(const std::string& section, const std::string& key) const;
    void set(const std::string& section, const std::string& key, const std::string& value,
             int line = 0);
    // "section.key=value"; used by the CLI --override flag.
    void set_path(const std::string& assignment);
};

RawDoc parse_document(const std::string& text);

} // namespace eitmech
