#include "qharm/errors.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

namespace qharm {

const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::SumNotOne: return "SumNotOne";
    case ErrorCode::AsymmetricWeights: return "AsymmetricWeights";
    case ErrorCode::PositiveJumpTooLarge: return "PositiveJumpTooLarge";
    case ErrorCode::NonzeroDrift: return "NonzeroDrift";
    case ErrorCode::Reducible: return "Reducible";
    case ErrorCode::NegativeWeight: return "NegativeWeight";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DegenerateCovariance: return "DegenerateCovariance";
    case ErrorCode::FieldMismatch: return "FieldMismatch";
    case ErrorCode::NonUnitDivisor: return "NonUnitDivisor";
    case ErrorCode::NonSquareConstant: return "NonSquareConstant";
    case ErrorCode::CompositionDivergence: return "CompositionDivergence";
    case ErrorCode::NotDivisible: return "NotDivisible";
    case ErrorCode::RootNotBracketed: return "RootNotBracketed";
    case ErrorCode::InsufficientResolution: return "InsufficientResolution";
    case ErrorCode::BackendUnavailable: return "BackendUnavailable";
    case ErrorCode::OutsideDomain: return "OutsideDomain";
    case ErrorCode::BranchCut: return "BranchCut";
    case ErrorCode::NotSmallStep: return "NotSmallStep";
    case ErrorCode::NotBipolarFamily: return "NotBipolarFamily";
    case ErrorCode::NoInteriorCriticalPoint: return "NoInteriorCriticalPoint";
    case ErrorCode::IllConditioned: return "IllConditioned";
    case ErrorCode::UnsupportedFillPattern: return "UnsupportedFillPattern";
    case ErrorCode::ConsistencyResidual: return "ConsistencyResidual";
    case ErrorCode::WindowTooSmall: return "WindowTooSmall";
    case ErrorCode::SingularDiagonal: return "SingularDiagonal";
    case ErrorCode::InconsistentData: return "InconsistentData";
    case ErrorCode::SeriesDivergence: return "SeriesDivergence";
    case ErrorCode::PoleOnDiagonal: return "PoleOnDiagonal";
    case ErrorCode::TailDominates: return "TailDominates";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(what), codes_{code} {}

Error::Error(std::vector<ErrorCode> codes, const std::string& what)
    : std::runtime_error(what), codes_(std::move(codes)) {
  if (codes_.empty()) throw std::logic_error("Error needs at least one code");
}

bool Error::has(ErrorCode c) const {
  return std::find(codes_.begin(), codes_.end(), c) != codes_.end();
}

std::string Error::json() const {
  nlohmann::json j;
  j["error"] = to_string(code());
  auto& arr = j["codes"] = nlohmann::json::array();
  for (auto c : codes_) arr.push_back(to_string(c));
  j["message"] = what();
  return j.dump();
}

}  // namespace qharm
