#ifndef CBRN_MANIFEST_HPP
#define CBRN_MANIFEST_HPP

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cbrn/pattern.hpp"

namespace cbrn {

struct ManifestEntry {
    std::string attribute;
    int index = 0;
    std::string label;
    std::string source; // file path, or "synthetic"
};

struct DatasetManifest {
    // Attribute order is the chain order; element order is the neuron order.
    std::vector<std::pair<std::string, std::vector<ManifestEntry>>> attributes;

    const std::vector<ManifestEntry>* find(const std::string& attribute) const {
        for (const auto& [name, elems] : attributes)
            if (name == attribute) return &elems;
        return nullptr;
    }
};

// The five default attribute groups, seven elements each, all synthetic.
inline DatasetManifest default_manifest() {
    static const std::vector<std::pair<std::string, std::vector<std::string>>> table = {
        {"Color", {"red", "orange", "yellow", "green", "blue", "indigo", "purple"}},
        {"Shape", {"square", "circle", "oval", "rectangle", "trapezoid", "triangle", "rhombus"}},
        {"Volume",
         {"extra-large", "large", "medium", "small-medium", "small", "extra-small", "mini"}},
        {"SpectacularView",
         {"Iguazu", "MaunaKea", "MilfordSound", "MonumentVY", "Rockies", "Tekapo", "Yellowknife"}},
        {"Constellation",
         {"Andromeda", "Aquarius", "Cassiopeia", "Centaurus", "Cygnus", "Orion", "Perseus"}}};
    DatasetManifest m;
    for (const auto& [attr, labels] : table) {
        std::vector<ManifestEntry> elems;
        for (size_t i = 0; i < labels.size(); ++i)
            elems.push_back({attr, static_cast<int>(i), labels[i], "synthetic"});
        m.attributes.emplace_back(attr, std::move(elems));
    }
    return m;
}

inline void validate_manifest(const DatasetManifest& m) {
    std::set<std::string> attr_names;
    for (const auto& [attr, elems] : m.attributes) {
        if (!attr_names.insert(attr).second)
            throw std::runtime_error("manifest: duplicate attribute '" + attr + "'");
        std::set<std::string> labels;
        for (size_t i = 0; i < elems.size(); ++i) {
            if (elems[i].index != static_cast<int>(i))
                throw std::runtime_error("manifest: attribute '" + attr +
                                         "' element indices must be contiguous from 0, got " +
                                         std::to_string(elems[i].index) + " at position " +
                                         std::to_string(i));
            if (!labels.insert(elems[i].label).second)
                throw std::runtime_error("manifest: duplicate label '" + elems[i].label +
                                         "' in attribute '" + attr + "'");
        }
    }
}

// Line format: <attribute>\t<index>\t<label>\t<source>; '#' starts a comment.
inline DatasetManifest parse_manifest(const std::string& text) {
    DatasetManifest m;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> fields;
        size_t start = 0;
        for (;;) {
            size_t tab = line.find('\t', start);
            fields.push_back(line.substr(start, tab == std::string::npos ? tab : tab - start));
            if (tab == std::string::npos) break;
            start = tab + 1;
        }
        if (fields.size() != 4)
            throw std::runtime_error("manifest line " + std::to_string(lineno) +
                                     ": expected 4 tab-separated fields, got " +
                                     std::to_string(fields.size()));
        ManifestEntry e;
        e.attribute = fields[0];
        try {
            e.index = std::stoi(fields[1]);
        } catch (const std::exception&) {
            throw std::runtime_error("manifest line " + std::to_string(lineno) +
                                     ": bad index '" + fields[1] + "'");
        }
        e.label = fields[2];
        e.source = fields[3];
        if (m.attributes.empty() || m.attributes.back().first != e.attribute) {
            if (m.find(e.attribute))
                throw std::runtime_error("manifest line " + std::to_string(lineno) +
                                         ": attribute '" + e.attribute + "' is not contiguous");
            m.attributes.emplace_back(e.attribute, std::vector<ManifestEntry>{});
        }
        m.attributes.back().second.push_back(std::move(e));
    }
    validate_manifest(m);
    return m;
}

inline std::string write_manifest(const DatasetManifest& m) {
    std::string out = "# attribute\tindex\tlabel\tsource\n";
    for (const auto& [attr, elems] : m.attributes)
        for (const auto& e : elems)
            out += e.attribute + "\t" + std::to_string(e.index) + "\t" + e.label + "\t" +
                   e.source + "\n";
    return out;
}

// Loads every element image: synthetic entries are generated, paths are read
// relative to base_dir (empty base_dir = as written).
inline std::map<std::string, std::vector<PatternImage>> resolve_patterns(
    const DatasetManifest& m, int width, int height, const std::string& base_dir = "") {
    validate_manifest(m);
    std::map<std::string, std::vector<PatternImage>> out;
    for (const auto& [attr, elems] : m.attributes) {
        std::vector<PatternImage>& imgs = out[attr];
        for (const auto& e : elems) {
            if (e.source == "synthetic") {
                imgs.push_back(synth_pattern(e.label, width, height));
            } else {
                std::string path =
                    base_dir.empty() ? e.source : base_dir + "/" + e.source;
                std::ifstream f(path, std::ios::binary);
                if (!f) throw std::runtime_error("cannot open pattern file: " + path);
                std::ostringstream buf;
                buf << f.rdbuf();
                PatternImage img = load_pbm(buf.str(), e.label);
                if (img.width != width || img.height != height)
                    throw std::runtime_error("pattern file " + path + " is " +
                                             std::to_string(img.width) + "x" +
                                             std::to_string(img.height) + ", expected " +
                                             std::to_string(width) + "x" +
                                             std::to_string(height));
                imgs.push_back(std::move(img));
            }
        }
    }
    return out;
}

} // namespace cbrn

#endif
