#include "sigseg/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <tuple>

#include <json.hpp>

#include "sigseg/csv.hpp"
#include "sigseg/error.hpp"

namespace sigseg {

namespace {

void require_valid(const ActivitySegment& s) {
  if (!(s.start_s < s.end_s)) {
    throw Error(ErrorCode::DegenerateSegment, "segment [" + std::to_string(s.start_s) + ", " +
                                                  std::to_string(s.end_s) + "] of '" + s.video_id +
                                                  "' is empty");
  }
}

nlohmann::json to_json(const ActivitySegment& s) {
  return {{"video_id", s.video_id}, {"class", s.class_id}, {"start_s", s.start_s}, {"end_s", s.end_s}};
}

}  // namespace

double overlap(const ActivitySegment& g, const ActivitySegment& p) {
  require_valid(g);
  require_valid(p);
  const double inter = std::max(std::min(g.end_s, p.end_s) - std::max(g.start_s, p.start_s), 0.0);
  const double span = std::max(g.end_s, p.end_s) - std::min(g.start_s, p.start_s);
  return inter / span;
}

bool match_eligible(const ActivitySegment& g, const ActivitySegment& p, double tol_s) {
  return g.video_id == p.video_id && g.class_id == p.class_id &&
         std::abs(p.start_s - g.start_s) <= tol_s && std::abs(p.end_s - g.end_s) <= tol_s;
}

std::vector<Match> match_predictions(std::span<const ActivitySegment> gts,
                                     std::span<const ActivitySegment> preds, double tol_s) {
  std::vector<Match> pairs;
  for (std::size_t i = 0; i < gts.size(); ++i) {
    for (std::size_t j = 0; j < preds.size(); ++j) {
      if (match_eligible(gts[i], preds[j], tol_s)) pairs.push_back({i, j, overlap(gts[i], preds[j])});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [&](const Match& a, const Match& b) {
    if (a.os != b.os) return a.os > b.os;
    const auto key = [&](const Match& m) {
      return std::make_tuple(gts[m.gt].start_s, preds[m.pred].start_s, gts[m.gt].class_id, m.gt, m.pred);
    };
    return key(a) < key(b);
  });
  std::vector<bool> gt_used(gts.size(), false), pred_used(preds.size(), false);
  std::vector<Match> out;
  for (const auto& m : pairs) {
    if (gt_used[m.gt] || pred_used[m.pred]) continue;
    gt_used[m.gt] = pred_used[m.pred] = true;
    out.push_back(m);
  }
  return out;
}

EvalReport average_score(std::span<const ActivitySegment> gts,
                         std::span<const ActivitySegment> preds, double tol_s) {
  if (gts.empty()) throw Error(ErrorCode::EmptyGroundTruth, "no ground-truth activities");
  EvalReport report;
  for (const auto& g : gts) report.records.push_back({g, std::nullopt, 0.0});
  const auto matches = match_predictions(gts, preds, tol_s);
  for (const auto& m : matches) {
    report.records[m.gt].pred = preds[m.pred];
    report.records[m.gt].os = m.os;
  }
  // Summing in ground-truth order keeps the score independent of prediction order.
  double total = 0.0;
  for (const auto& r : report.records) total += r.os;
  report.average_score = total / static_cast<double>(gts.size());
  report.unmatched_gt = gts.size() - matches.size();
  report.unused_pred = preds.size() - matches.size();
  return report;
}

void write_segments_csv(std::span<const ActivitySegment> segments, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  out << "video_id,class,start_s,end_s\n";
  char line[96];
  for (const auto& s : segments) {
    std::snprintf(line, sizeof line, ",%d,%.6f,%.6f\n", s.class_id, s.start_s, s.end_s);
    out << s.video_id << line;
  }
  if (!out) throw Error(ErrorCode::IoFailure, "write failed: " + path.string());
}

std::vector<ActivitySegment> read_segments_csv(const std::filesystem::path& path) {
  const auto table = csv::read(path, "video_id,class,start_s,end_s");
  std::vector<ActivitySegment> out;
  for (const auto& r : table.rows) {
    ActivitySegment s{r[0], static_cast<int>(csv::to_int(r[1])), csv::to_double(r[2]), csv::to_double(r[3])};
    require_valid(s);
    out.push_back(std::move(s));
  }
  return out;
}

void write_report_json(const EvalReport& report, const std::filesystem::path& path) {
  nlohmann::json matches = nlohmann::json::array();
  for (const auto& r : report.records) {
    matches.push_back({{"gt", to_json(r.gt)},
                       {"pred", r.pred ? to_json(*r.pred) : nlohmann::json(nullptr)},
                       {"os", r.os}});
  }
  const nlohmann::json doc = {{"average_score", report.average_score},
                              {"matches", matches},
                              {"unmatched_gt", report.unmatched_gt},
                              {"unused_pred", report.unused_pred}};
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  out << doc.dump(2) << '\n';
}

}  // namespace sigseg
