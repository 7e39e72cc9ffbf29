#ifndef FEATLEARN_ERROR_HPP
#define FEATLEARN_ERROR_HPP

#include <stdexcept>
#include <string>

namespace featlearn {

enum class errc {
    // usage / contract errors
    bad_ratios,
    bad_k,
    bad_b,
    bad_kmax,
    bad_config,
    // data errors
    missing_file,
    ragged_row,
    bad_cell,
    schema_mismatch,
    zero_variance,
    empty_input,
    length_mismatch,
    shape_mismatch,
    missing_baseline,
    empty_series,
    // numerical errors
    non_finite,
    divergence,
    degenerate_data,
};

// CLI exit-code category: 1 = usage, 2 = data, 3 = numerical.
inline int exit_category(errc c) {
    switch (c) {
    case errc::bad_ratios:
    case errc::bad_k:
    case errc::bad_b:
    case errc::bad_kmax:
    case errc::bad_config:
        return 1;
    case errc::missing_file:
    case errc::ragged_row:
    case errc::bad_cell:
    case errc::schema_mismatch:
    case errc::zero_variance:
    case errc::empty_input:
    case errc::length_mismatch:
    case errc::shape_mismatch:
    case errc::missing_baseline:
    case errc::empty_series:
        return 2;
    case errc::non_finite:
    case errc::divergence:
    case errc::degenerate_data:
        return 3;
    }
    return 3;
}

inline const char* errc_name(errc c) {
    switch (c) {
    case errc::bad_ratios: return "BadRatios";
    case errc::bad_k: return "BadK";
    case errc::bad_b: return "BadB";
    case errc::bad_kmax: return "BadKMax";
    case errc::bad_config: return "BadConfig";
    case errc::missing_file: return "MissingFile";
    case errc::ragged_row: return "RaggedRow";
    case errc::bad_cell: return "BadCell";
    case errc::schema_mismatch: return "SchemaMismatch";
    case errc::zero_variance: return "ZeroVariance";
    case errc::empty_input: return "EmptyInput";
    case errc::length_mismatch: return "LengthMismatch";
    case errc::shape_mismatch: return "ShapeMismatch";
    case errc::missing_baseline: return "MissingBaseline";
    case errc::empty_series: return "EmptySeries";
    case errc::non_finite: return "NonFinite";
    case errc::divergence: return "DivergenceDetected";
    case errc::degenerate_data: return "DegenerateData";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(errc code, const std::string& msg)
        : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}

    errc code() const noexcept { return code_; }
    int exit_code() const noexcept { return exit_category(code_); }

private:
    errc code_;
};

} // namespace featlearn

#endif
