#include "elmsync/labels.hpp"

#include <string>

namespace elmsync {

namespace {

void check_channel_length(std::size_t channel_length, std::size_t cp_len) {
    if (channel_length < 1 || channel_length > cp_len)
        throw DomainError("channel length " + std::to_string(channel_length) +
                          " outside [1, Ng=" + std::to_string(cp_len) + "]");
}

void check_in_window(std::size_t idx, const SystemParams& params) {
    if (idx >= params.window_len)
        throw DomainError("label index " + std::to_string(idx) + " outside window of " +
                          std::to_string(params.window_len));
}

LabelVector single_one(std::size_t idx, const SystemParams& params, LabelScheme scheme) {
    check_in_window(idx, params);
    LabelVector label{RealVec(params.window_len, 0.0), scheme};
    label.values[idx] = 1.0;
    return label;
}

}  // namespace

LabelScheme parse_label_scheme(std::string_view id) {
    if (id == "onehot_end") return LabelScheme::onehot_end;
    if (id == "midpoint") return LabelScheme::midpoint;
    if (id == "isi_free") return LabelScheme::isi_free;
    throw ConfigError("unknown label scheme '" + std::string(id) + "'");
}

std::string_view to_string(LabelScheme scheme) {
    switch (scheme) {
        case LabelScheme::onehot_end: return "onehot_end";
        case LabelScheme::midpoint: return "midpoint";
        case LabelScheme::isi_free: return "isi_free";
    }
    return "?";
}

IsiFreeRegion isi_free_region(std::size_t sto, std::size_t channel_length, std::size_t cp_len) {
    check_channel_length(channel_length, cp_len);
    return {sto + channel_length, sto + cp_len + 1};
}

LabelVector label_onehot_end(std::size_t sto, const SystemParams& params, std::size_t channel_length) {
    check_channel_length(channel_length, params.cp_len);
    return single_one(sto + params.cp_len + 1, params, LabelScheme::onehot_end);
}

LabelVector label_midpoint(std::size_t sto, const SystemParams& params, std::size_t channel_length) {
    check_channel_length(channel_length, params.cp_len);
    // Same legal offsets as the other schemes: the whole region must fit.
    check_in_window(sto + params.cp_len + 1, params);
    const std::size_t centre = sto + (params.cp_len + channel_length + 1) / 2;
    return single_one(centre, params, LabelScheme::midpoint);
}

LabelVector label_isifree(std::size_t sto, const SystemParams& params, std::size_t channel_length) {
    const auto region = isi_free_region(sto, channel_length, params.cp_len);
    check_in_window(region.last, params);
    LabelVector label{RealVec(params.window_len, 0.0), LabelScheme::isi_free};
    for (std::size_t n = region.first; n <= region.last; ++n) label.values[n] = 1.0;
    return label;
}

LabelVector make_label(LabelScheme scheme, std::size_t sto, const SystemParams& params,
                       std::size_t channel_length) {
    switch (scheme) {
        case LabelScheme::onehot_end: return label_onehot_end(sto, params, channel_length);
        case LabelScheme::midpoint: return label_midpoint(sto, params, channel_length);
        case LabelScheme::isi_free: return label_isifree(sto, params, channel_length);
    }
    throw ConfigError("unknown label scheme");
}

}  // namespace elmsync
