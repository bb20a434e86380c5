#include "ecgscreen/record.hpp"

#include <cctype>
#include <cmath>

#include "ecgscreen/errors.hpp"

namespace ecgscreen {

namespace {

bool iequals(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(a[i])) !=
            std::tolower(static_cast<unsigned char>(b[i])))
            return false;
    }
    return true;
}

} // namespace

int lead_index(std::string_view name) {
    for (int i = 0; i < kNumLeads; ++i) {
        if (iequals(name, kLeadNames[i])) return i;
    }
    return -1;
}

void EcgRecord::validate() const {
    if (static_cast<int>(leads.size()) != kNumLeads)
        throw ShapeError("record " + record_id + ": expected 12 leads, got " +
                         std::to_string(leads.size()));
    const std::size_t n = leads.front().size();
    if (n == 0) throw ShapeError("record " + record_id + ": empty leads");
    for (const auto& lead : leads) {
        if (lead.size() != n)
            throw ShapeError("record " + record_id + ": ragged lead lengths");
        for (double v : lead) {
            if (!std::isfinite(v))
                throw CalibrationError("record " + record_id + ": non-finite sample");
        }
    }
}

} // namespace ecgscreen
