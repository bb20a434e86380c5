#include "ecgscreen/metadata.hpp"

#include <algorithm>
#include <cctype>
#include <random>

#include "ecgscreen/errors.hpp"

namespace ecgscreen {

namespace {

// Minimal RFC-4180 reader: quoted fields may contain commas, newlines and
// doubled quotes.
std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool any = false;

    auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
    };
    auto end_row = [&] {
        end_field();
        rows.push_back(std::move(row));
        row.clear();
        any = false;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        switch (c) {
            case '"': quoted = true; any = true; break;
            case ',': end_field(); any = true; break;
            case '\r': break;
            case '\n':
                if (any || !field.empty() || !row.empty()) end_row();
                break;
            default: field += c; any = true; break;
        }
    }
    if (any || !field.empty() || !row.empty()) end_row();
    return rows;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

std::optional<double> parse_optional_number(const std::string& raw) {
    std::string s = trim(raw);
    if (s.empty() || lower(s) == "nan" || lower(s) == "na") return std::nullopt;
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) return std::nullopt;
        if (!(v == v)) return std::nullopt; // NaN literal
        return v;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

Sex parse_sex(const std::string& raw) {
    std::string s = lower(trim(raw));
    // PTB-XL encodes sex numerically: 0 = male, 1 = female.
    if (s == "0" || s == "m" || s == "male") return Sex::Male;
    if (s == "1" || s == "f" || s == "female") return Sex::Female;
    return Sex::Unknown;
}

// The scp_codes column holds a Python-style dict literal, e.g.
// {'NORM': 100.0, 'SR': 0.0}. Keys may be single- or double-quoted.
std::map<std::string, double> parse_code_map(const std::string& raw) {
    std::map<std::string, double> codes;
    std::string s = trim(raw);
    if (s.empty()) throw FormatError("empty code map");
    std::size_t i = 0;
    auto skip_ws = [&] { while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i; };

    if (s[i] != '{') throw FormatError("code map must start with '{'");
    ++i;
    skip_ws();
    if (i < s.size() && s[i] == '}') {
        ++i;
    } else {
        while (true) {
            skip_ws();
            if (i >= s.size() || (s[i] != '\'' && s[i] != '"'))
                throw FormatError("expected quoted code name");
            char quote = s[i++];
            std::string key;
            while (i < s.size() && s[i] != quote) key += s[i++];
            if (i >= s.size()) throw FormatError("unterminated code name");
            ++i;
            skip_ws();
            if (i >= s.size() || s[i] != ':') throw FormatError("expected ':' after code name");
            ++i;
            skip_ws();
            std::size_t start = i;
            while (i < s.size() && s[i] != ',' && s[i] != '}') ++i;
            auto value = parse_optional_number(s.substr(start, i - start));
            if (!value) throw FormatError("bad likelihood for code " + key);
            if (*value < 0.0 || *value > 100.0)
                throw FormatError("likelihood out of [0,100] for code " + key);
            codes[key] = *value;
            skip_ws();
            if (i >= s.size()) throw FormatError("unterminated code map");
            if (s[i] == '}') { ++i; break; }
            if (s[i] != ',') throw FormatError("expected ',' between codes");
            ++i;
        }
    }
    skip_ws();
    if (i != s.size()) throw FormatError("trailing characters after code map");
    return codes;
}

int find_column(const std::vector<std::string>& header, std::initializer_list<const char*> names) {
    for (const char* name : names) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (lower(trim(header[i])) == name) return static_cast<int>(i);
        }
    }
    return -1;
}

std::string cell(const std::vector<std::string>& row, int col) {
    return (col >= 0 && col < static_cast<int>(row.size())) ? row[col] : "";
}

} // namespace

const std::set<std::string>& default_positive_codes() {
    static const std::set<std::string> codes = {"RVH", "RAO/RAE"};
    return codes;
}

bool code_positive(const RecordMeta& meta, const std::string& code, double threshold) {
    auto it = meta.scp_codes.find(code);
    if (it == meta.scp_codes.end()) return false;
    return it->second >= threshold || it->second == 0.0;
}

const RecordMeta* CohortCatalog::find(const std::string& record_id) const {
    for (const auto& entry : entries) {
        if (entry.record_id == record_id) return &entry;
    }
    return nullptr;
}

std::vector<RecordMeta> load_metadata(std::string_view csv_text, MetadataOptions options) {
    auto rows = parse_csv(csv_text);
    if (rows.empty()) throw SchemaError("metadata file is empty");

    const auto& header = rows.front();
    int id_col = find_column(header, {"ecg_id", "record_id"});
    int age_col = find_column(header, {"age"});
    int sex_col = find_column(header, {"sex"});
    int height_col = find_column(header, {"height"});
    int weight_col = find_column(header, {"weight"});
    int codes_col = find_column(header, {"scp_codes"});
    int lr_col = find_column(header, {"filename_lr"});
    int hr_col = find_column(header, {"filename_hr"});

    auto require = [](int col, const char* name) {
        if (col < 0) throw SchemaError(std::string("missing mandatory column: ") + name);
    };
    require(id_col, "ecg_id/record_id");
    require(age_col, "age");
    require(sex_col, "sex");
    require(height_col, "height");
    require(weight_col, "weight");
    require(codes_col, "scp_codes");

    std::vector<RecordMeta> metas;
    metas.reserve(rows.size() - 1);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        RecordMeta meta;
        meta.record_id = trim(cell(row, id_col));
        if (meta.record_id.empty()) {
            if (options.lenient) continue;
            throw RowError(r, "empty record id");
        }
        meta.age = parse_optional_number(cell(row, age_col));
        meta.sex = parse_sex(cell(row, sex_col));
        meta.height = parse_optional_number(cell(row, height_col));
        meta.weight = parse_optional_number(cell(row, weight_col));
        try {
            meta.scp_codes = parse_code_map(cell(row, codes_col));
        } catch (const FormatError& e) {
            if (options.lenient) continue;
            throw RowError(r, e.what());
        }
        meta.filename_lr = trim(cell(row, lr_col));
        meta.filename_hr = trim(cell(row, hr_col));
        metas.push_back(std::move(meta));
    }
    return metas;
}

std::map<std::string, std::string> load_code_descriptions(std::string_view csv_text) {
    auto rows = parse_csv(csv_text);
    if (rows.empty()) return {};
    int desc_col = find_column(rows.front(), {"description"});
    std::map<std::string, std::string> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].empty()) continue;
        std::string code = trim(rows[r].front());
        if (code.empty()) continue;
        out[code] = desc_col >= 0 ? cell(rows[r], desc_col) : "";
    }
    return out;
}

CohortCatalog select_cohort(const std::vector<RecordMeta>& meta,
                            const std::set<std::string>& positive_codes,
                            double likelihood_threshold,
                            ControlPolicy control_policy,
                            std::uint64_t seed) {
    if (positive_codes.empty()) throw EmptyCohort("no positive codes given");

    CohortCatalog catalog;
    catalog.positive_codes = positive_codes;
    catalog.likelihood_threshold = likelihood_threshold;

    std::vector<std::string> control_pool;
    std::set<std::string> seen;
    for (const auto& entry : meta) {
        if (!seen.insert(entry.record_id).second)
            throw SchemaError("duplicate record id: " + entry.record_id);

        bool positive = false;
        for (const auto& code : positive_codes) {
            if (code_positive(entry, code, likelihood_threshold)) { positive = true; break; }
        }
        // A record mentioning any positive code below threshold is neither a
        // positive nor an eligible control.
        bool mentions_positive = false;
        for (const auto& code : positive_codes) {
            if (entry.scp_codes.count(code)) { mentions_positive = true; break; }
        }

        if (positive) {
            catalog.positive_ids.insert(entry.record_id);
            catalog.entries.push_back(entry);
        } else if (!mentions_positive && code_positive(entry, "NORM", likelihood_threshold)) {
            control_pool.push_back(entry.record_id);
            catalog.entries.push_back(entry);
        }
    }
    if (catalog.positive_ids.empty())
        throw EmptyCohort("no records match the positive codes at threshold " +
                          std::to_string(likelihood_threshold));

    std::sort(control_pool.begin(), control_pool.end());
    if (control_policy == ControlPolicy::NormMatched) {
        std::mt19937_64 rng(seed);
        std::shuffle(control_pool.begin(), control_pool.end(), rng);
        control_pool.resize(std::min(control_pool.size(), catalog.positive_ids.size()));
    }
    catalog.control_ids.insert(control_pool.begin(), control_pool.end());

    // Drop catalog entries that ended up in neither set.
    std::erase_if(catalog.entries, [&](const RecordMeta& m) {
        return !catalog.positive_ids.count(m.record_id) && !catalog.control_ids.count(m.record_id);
    });
    return catalog;
}

CohortCatalog select_cohort(const std::vector<RecordMeta>& meta, std::uint64_t seed) {
    return select_cohort(meta, default_positive_codes(), kDefaultLikelihoodThreshold,
                         ControlPolicy::NormMatched, seed);
}

} // namespace ecgscreen
