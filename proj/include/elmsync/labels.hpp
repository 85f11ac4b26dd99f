#pragma once

#include "elmsync/common.hpp"

#include <string_view>

namespace elmsync {

enum class LabelScheme {
    onehot_end,  // single 1 at theta + Ng + 1
    midpoint,    // single 1 at the middle of the ISI-free region
    isi_free,    // ones over the whole ISI-free region
};

/// Accepts "onehot_end", "midpoint", "isi_free".
LabelScheme parse_label_scheme(std::string_view id);
std::string_view to_string(LabelScheme scheme);

/// Inclusive index range [first, last] of STO estimates that cause no ISI.
struct IsiFreeRegion {
    std::size_t first = 0;
    std::size_t last = 0;

    bool contains(std::size_t idx) const { return idx >= first && idx <= last; }
    std::size_t size() const { return last - first + 1; }
};

/// [theta + L, theta + Ng + 1]. Requires 1 <= L <= Ng.
IsiFreeRegion isi_free_region(std::size_t sto, std::size_t channel_length, std::size_t cp_len);

struct LabelVector {
    RealVec values;
    LabelScheme scheme = LabelScheme::isi_free;
};

// All window positions are 0-based. Each builder throws DomainError when
// its support leaves the Nd-sample window or L is outside [1, Ng].
LabelVector label_onehot_end(std::size_t sto, const SystemParams& params, std::size_t channel_length);
LabelVector label_midpoint(std::size_t sto, const SystemParams& params, std::size_t channel_length);
LabelVector label_isifree(std::size_t sto, const SystemParams& params, std::size_t channel_length);

LabelVector make_label(LabelScheme scheme, std::size_t sto, const SystemParams& params,
                       std::size_t channel_length);

}  // namespace elmsync
