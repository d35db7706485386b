#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fairrank {

// Conditions shared by thrown errors and per-request degenerate flags.
enum class Errc {
    InvalidArgument,
    Parse,
    DuplicateRank,
    UnknownRequest,
    NegativeWeight,
    RowSumOutOfTolerance,
    UnknownMetric,
    ParameterOutOfDomain,
    MissingRelevance,
    Io,
    // Degenerate metric conditions.
    NoLabeledDocs,
    ShortList,
    UndefinedNormalizer,
    DegenerateDenominator,
    DegenerateUtility,
    EmptyGroup,
    NoExposure,
    NoPairs,
    NoRelevant,
    AllDegenerate,
    Undefined,
};

inline std::string_view to_string(Errc code) {
    switch (code) {
        case Errc::InvalidArgument: return "InvalidArgument";
        case Errc::Parse: return "ParseError";
        case Errc::DuplicateRank: return "DuplicateRank";
        case Errc::UnknownRequest: return "UnknownRequest";
        case Errc::NegativeWeight: return "NegativeWeight";
        case Errc::RowSumOutOfTolerance: return "RowSumOutOfTolerance";
        case Errc::UnknownMetric: return "UnknownMetric";
        case Errc::ParameterOutOfDomain: return "ParameterOutOfDomain";
        case Errc::MissingRelevance: return "MissingRelevance";
        case Errc::Io: return "IoError";
        case Errc::NoLabeledDocs: return "NoLabeledDocs";
        case Errc::ShortList: return "ShortList";
        case Errc::UndefinedNormalizer: return "UndefinedNormalizer";
        case Errc::DegenerateDenominator: return "DegenerateDenominator";
        case Errc::DegenerateUtility: return "DegenerateUtility";
        case Errc::EmptyGroup: return "EmptyGroup";
        case Errc::NoExposure: return "NoExposure";
        case Errc::NoPairs: return "NoPairs";
        case Errc::NoRelevant: return "NoRelevant";
        case Errc::AllDegenerate: return "AllDegenerate";
        case Errc::Undefined: return "Undefined";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

}  // namespace fairrank
