#include "driveloc/core.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <sstream>

#include "driveloc/kernels.hpp"

namespace driveloc {

std::string_view view_name(View view) {
  switch (view) {
    case View::Dashboard: return "Dashboard";
    case View::Rearview: return "Rearview";
    case View::Rightside: return "Rightside";
  }
  return "?";
}

View parse_view(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (lower == "dashboard") return View::Dashboard;
  if (lower == "rearview") return View::Rearview;
  if (lower == "rightside") return View::Rightside;
  throw Error(ErrorKind::Validation, "unknown view '" + std::string(name) + "'");
}

std::string_view error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::AllZeroVector: return "AllZeroVector";
    case ErrorKind::InvalidProbability: return "InvalidProbability";
    case ErrorKind::DuplicateFrame: return "DuplicateFrame";
    case ErrorKind::MixedVideo: return "MixedVideo";
    case ErrorKind::NonContiguous: return "NonContiguous";
    case ErrorKind::EmptyStreams: return "EmptyStreams";
    case ErrorKind::InconsistentInput: return "InconsistentInput";
    case ErrorKind::EmptySequence: return "EmptySequence";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::InfeasibleConfig: return "InfeasibleConfig";
    case ErrorKind::NoCandidateRun: return "NoCandidateRun";
    case ErrorKind::Parse: return "Parse";
    case ErrorKind::Validation: return "Validation";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(error_kind_name(kind)) + ": " + what), kind_(kind) {}

void ClipSpec::validate() const {
  if (!(fps > 0.0) || clip_len_frames <= 0 || stride_frames <= 0) {
    throw Error(ErrorKind::Validation, "clip spec fields must be strictly positive");
  }
}

TimeSpan clip_time_bounds(std::size_t clip_index, const ClipSpec& spec) {
  const double start = static_cast<double>(clip_index) * spec.stride_frames / spec.fps;
  return {start, start + spec.clip_len_s()};
}

void validate_probs(std::span<const double> probs) {
  bool any_positive = false;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = probs[i];
    if (!std::isfinite(p) || p < 0.0) {
      std::ostringstream msg;
      msg << "entry " << i << " is " << p;
      throw Error(ErrorKind::InvalidProbability, msg.str());
    }
    any_positive = any_positive || p > 0.0;
  }
  if (!any_positive) throw Error(ErrorKind::AllZeroVector, "probability vector has no mass");
}

std::vector<double> normalize_probs(std::span<const double> probs) {
  validate_probs(probs);
  const auto& k = kernels::active();
  std::vector<double> out(probs.begin(), probs.end());
  const double total = k.lane_sum(out.data(), out.size());
  if (std::abs(total - 1.0) > 1e-12) k.divide(out.data(), out.size(), total);
  return out;
}

ProbFrame normalize_probs(const ProbFrame& frame) {
  ProbFrame out = frame;
  out.probs = normalize_probs(frame.probs);
  return out;
}

bool TopK::contains(ClassId c) const {
  return std::any_of(ranks.begin(), ranks.end(),
                     [c](const Ranked& r) { return r.class_id == c && r.prob > 0.0; });
}

double TopK::prob_of(ClassId c) const {
  for (const auto& r : ranks) {
    if (r.class_id == c) return r.prob;
  }
  return 0.0;
}

TopK topk(std::span<const double> probs, std::size_t k) {
  k = std::min(k, probs.size());
  std::vector<ClassId> order(probs.size());
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](ClassId a, ClassId b) {
                      if (probs[a] != probs[b]) return probs[a] > probs[b];
                      return a < b;
                    });
  TopK out;
  out.ranks.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.ranks.push_back({order[i], probs[order[i]]});
  return out;
}

void Segment::validate() const {
  if (!(start_s >= 0.0) || !(start_s < end_s) || !(score >= 0.0)) {
    std::ostringstream msg;
    msg << "segment class " << class_id << " [" << start_s << ", " << end_s << ") score "
        << score;
    throw Error(ErrorKind::Validation, msg.str());
  }
}

}  // namespace driveloc
