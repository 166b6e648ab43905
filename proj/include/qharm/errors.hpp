#ifndef QHARM_ERRORS_HPP
#define QHARM_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace qharm {

enum class ErrorCode {
  SumNotOne,
  AsymmetricWeights,
  PositiveJumpTooLarge,
  NonzeroDrift,
  Reducible,
  NegativeWeight,
  ParseError,
  DegenerateCovariance,
  FieldMismatch,
  NonUnitDivisor,
  NonSquareConstant,
  CompositionDivergence,
  NotDivisible,
  RootNotBracketed,
  InsufficientResolution,
  BackendUnavailable,
  OutsideDomain,
  BranchCut,
  NotSmallStep,
  NotBipolarFamily,
  NoInteriorCriticalPoint,
  IllConditioned,
  UnsupportedFillPattern,
  ConsistencyResidual,
  WindowTooSmall,
  SingularDiagonal,
  InconsistentData,
  SeriesDivergence,
  PoleOnDiagonal,
  TailDominates,
};

const char* to_string(ErrorCode c);

// Domain error. A rejected step set can carry several codes at once.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  Error(std::vector<ErrorCode> codes, const std::string& what);

  ErrorCode code() const { return codes_.front(); }
  const std::vector<ErrorCode>& codes() const { return codes_; }
  bool has(ErrorCode c) const;

  // {"error": "...", "codes": [...], "message": "..."}
  std::string json() const;

 private:
  std::vector<ErrorCode> codes_;
};

}  // namespace qharm

#endif
