#pragma once

#include <stdexcept>
#include <string>

namespace modcomm {

enum class errc {
  division_by_zero,
  field_mismatch,
  base_field_has_no_conjugation,
  not_torsion_free,
  not_transitive,
  not_a_member,
  empty_word,
  not_normal,
  identity_element,
  no_separator,
  search_exhausted,
  depth_beyond_decidable,
  n_bound_exceeded,
  not_in_conjugate,
  no_stabilizing_element,
  span_search_exhausted,
  no_solution,
  non_rational_t_square,
  not_conjugate,
  no_real_scaling,
  zero_leading_coefficient,
  negative_discriminant,
  parse_error,
  hash_mismatch,
  replay_failure,
  cache_error,
  internal,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::division_by_zero: return "DivisionByZero";
    case errc::field_mismatch: return "FieldMismatch";
    case errc::base_field_has_no_conjugation: return "BaseFieldHasNoConjugation";
    case errc::not_torsion_free: return "NotTorsionFree";
    case errc::not_transitive: return "NotTransitive";
    case errc::not_a_member: return "NotAMember";
    case errc::empty_word: return "EmptyWord";
    case errc::not_normal: return "NotNormal";
    case errc::identity_element: return "IdentityElement";
    case errc::no_separator: return "NoSeparator";
    case errc::search_exhausted: return "SearchExhausted";
    case errc::depth_beyond_decidable: return "DepthBeyondDecidable";
    case errc::n_bound_exceeded: return "NBoundExceeded";
    case errc::not_in_conjugate: return "NotInConjugate";
    case errc::no_stabilizing_element: return "NoStabilizingElement";
    case errc::span_search_exhausted: return "SpanSearchExhausted";
    case errc::no_solution: return "NoSolution";
    case errc::non_rational_t_square: return "NonRationalTSquare";
    case errc::not_conjugate: return "NotConjugate";
    case errc::no_real_scaling: return "NoRealScaling";
    case errc::zero_leading_coefficient: return "ZeroLeadingCoefficient";
    case errc::negative_discriminant: return "NegativeDiscriminant";
    case errc::parse_error: return "ParseError";
    case errc::hash_mismatch: return "HashMismatch";
    case errc::replay_failure: return "ReplayFailure";
    case errc::cache_error: return "CacheError";
    case errc::internal: return "InternalError";
  }
  return "UnknownError";
}

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  errc code() const { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw error(code, what); }

inline void require(bool cond, errc code, const std::string& what) {
  if (!cond) fail(code, what);
}

} // namespace modcomm
