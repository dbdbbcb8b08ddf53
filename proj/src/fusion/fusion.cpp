#include "driveloc/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "driveloc/kernels.hpp"

namespace driveloc {

ViewWeights ViewWeights::from_rows(const std::vector<Row>& rows,
                                   std::vector<ClassId>* renormalized_rows) {
  if (rows.empty()) throw Error(ErrorKind::Validation, "view weights need at least one row");
  ViewWeights out;
  for (auto& col : out.columns_) col.resize(rows.size());
  for (std::size_t c = 0; c < rows.size(); ++c) {
    double total = 0.0;
    for (double w : rows[c]) {
      if (!std::isfinite(w) || w < 0.0) {
        std::ostringstream msg;
        msg << "weight row " << c << " has invalid entry " << w;
        throw Error(ErrorKind::Validation, msg.str());
      }
      total += w;
    }
    if (!(total > 0.0)) {
      throw Error(ErrorKind::Validation, "weight row " + std::to_string(c) + " sums to zero");
    }
    if (renormalized_rows != nullptr && std::abs(total - 1.0) > 1e-6) {
      renormalized_rows->push_back(static_cast<ClassId>(c));
    }
    for (std::size_t v = 0; v < kNumViews; ++v) out.columns_[v][c] = rows[c][v] / total;
  }
  return out;
}

ViewWeights ViewWeights::uniform(int num_classes) {
  return from_rows(std::vector<Row>(static_cast<std::size_t>(num_classes), Row{1.0, 1.0, 1.0}));
}

ViewWeights::Row ViewWeights::row(ClassId c) const {
  Row r{};
  for (std::size_t v = 0; v < kNumViews; ++v) r[v] = columns_[v].at(static_cast<std::size_t>(c));
  return r;
}

std::optional<View> SpecialistSets::specialist_for(ClassId c) const {
  auto has = [c](const std::vector<ClassId>& set) {
    return std::find(set.begin(), set.end(), c) != set.end();
  };
  if (has(dashboard)) return View::Dashboard;
  if (has(rearview)) return View::Rearview;
  if (has(rightside)) return View::Rightside;
  return std::nullopt;
}

ViewWeights default_view_weights(int num_classes) {
  const SpecialistSets sets;
  std::vector<ViewWeights::Row> rows(static_cast<std::size_t>(num_classes), {1.0, 1.0, 1.0});
  for (ClassId c = 0; c < num_classes; ++c) {
    if (auto view = sets.specialist_for(c)) {
      auto& row = rows[static_cast<std::size_t>(c)];
      row = {0.25, 0.25, 0.25};
      row[view_slot(*view)] = 0.5;
    }
  }
  return ViewWeights::from_rows(rows);
}

AlignedStreams align_streams(const std::vector<ProbFrame>& frames) {
  if (frames.empty()) throw Error(ErrorKind::EmptyStreams, "no frames to align");
  AlignedStreams out;
  out.video_id = frames.front().video_id;
  std::size_t lo = frames.front().clip_index;
  std::size_t hi = lo;
  for (const auto& f : frames) {
    if (f.video_id != out.video_id) {
      throw Error(ErrorKind::MixedVideo, "'" + f.video_id + "' vs '" + out.video_id + "'");
    }
    lo = std::min(lo, f.clip_index);
    hi = std::max(hi, f.clip_index);
  }
  out.first_index = lo;
  out.slots.resize(hi - lo + 1);
  for (const auto& f : frames) {
    auto& slot = out.slots[f.clip_index - lo][view_slot(f.view)];
    if (slot.has_value()) {
      std::ostringstream msg;
      msg << "video " << f.video_id << " view " << view_name(f.view) << " clip " << f.clip_index;
      throw Error(ErrorKind::DuplicateFrame, msg.str());
    }
    slot = f.probs;
  }
  for (std::size_t t = 0; t < out.slots.size(); ++t) {
    const auto& s = out.slots[t];
    if (std::none_of(s.begin(), s.end(), [](const auto& p) { return p.has_value(); })) {
      std::ostringstream msg;
      msg << "video " << out.video_id << " has no view at clip " << lo + t;
      throw Error(ErrorKind::NonContiguous, msg.str());
    }
  }
  return out;
}

std::vector<std::vector<double>> fuse_views(const AlignedStreams& streams,
                                            const ViewWeights& weights, FusionMode mode) {
  if (streams.slots.empty()) throw Error(ErrorKind::EmptyStreams, "nothing to fuse");
  const auto n = static_cast<std::size_t>(weights.num_classes());
  const auto& k = kernels::active();

  std::vector<std::vector<double>> fused;
  fused.reserve(streams.size());
  for (std::size_t t = 0; t < streams.size(); ++t) {
    kernels::FuseArgs args;
    args.n = n;
    for (View v : kAllViews) {
      const auto& p = streams.slots[t][view_slot(v)];
      if (!p) continue;
      if (p->size() != n) {
        std::ostringstream msg;
        msg << "clip " << streams.first_index + t << " view " << view_name(v) << " has "
            << p->size() << " classes, weights have " << n;
        throw Error(ErrorKind::LengthMismatch, msg.str());
      }
      args.views[view_slot(v)] = p->data();
    }
    for (View v : kAllViews) args.weights[view_slot(v)] = weights.column(v);

    std::vector<double> out(n);
    if (mode == FusionMode::WeightedAverage) {
      k.fuse_weighted(args, out.data());
    } else {
      k.fuse_max(args, out.data());
    }
    const double total = k.lane_sum(out.data(), n);
    if (!(total > 0.0)) {
      throw Error(ErrorKind::AllZeroVector,
                  "fused vector at clip " + std::to_string(streams.first_index + t) +
                      " has no mass");
    }
    k.divide(out.data(), n, total);
    fused.push_back(std::move(out));
  }
  return fused;
}

}  // namespace driveloc
