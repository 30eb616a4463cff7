#include "mambatrack/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <string>

#include "mambatrack/assignment.hpp"

namespace mambatrack {

namespace {

// Records of one frame ordered by id so equal-cost ties resolve toward
// lower (gt id, hyp id) pairs.
std::map<int, std::vector<MotRecord>> by_frame_sorted(const std::vector<MotRecord>& records) {
  std::map<int, std::vector<MotRecord>> out;
  for (const MotRecord& r : records) out[r.frame].push_back(r);
  for (auto& [frame, rs] : out)
    std::stable_sort(rs.begin(), rs.end(), [](const MotRecord& a, const MotRecord& b) {
      if (a.id != b.id) return a.id < b.id;
      if (a.box.x != b.box.x) return a.box.x < b.box.x;
      return a.box.y < b.box.y;
    });
  return out;
}

// Pairs below the overlap floor cost more than any admissible matching so the
// solver maximizes the number of valid pairs first.
constexpr double kBlocked = 1e6;

}  // namespace

ClearCounts clear_mot(const std::vector<MotRecord>& gt, const std::vector<MotRecord>& result,
                      double iou_min) {
  const auto gt_frames = by_frame_sorted(gt);
  const auto res_frames = by_frame_sorted(result);
  std::set<int> frames;
  for (const auto& [f, _] : gt_frames) frames.insert(f);
  for (const auto& [f, _] : res_frames) frames.insert(f);

  static const std::vector<MotRecord> kNone;
  ClearCounts c;
  std::map<int, int> last_match;  // gt id -> hyp id it was last matched to
  std::map<int, int> current;     // matches of the previous frame
  for (int f : frames) {
    const auto gi = gt_frames.find(f);
    const auto ri = res_frames.find(f);
    const std::vector<MotRecord>& g = gi == gt_frames.end() ? kNone : gi->second;
    const std::vector<MotRecord>& h = ri == res_frames.end() ? kNone : ri->second;

    std::vector<char> g_used(g.size(), 0), h_used(h.size(), 0);
    std::map<int, int> now;
    std::size_t matched = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto prev = current.find(g[i].id);
      if (prev == current.end()) continue;
      for (std::size_t j = 0; j < h.size(); ++j) {
        if (h_used[j] || h[j].id != prev->second) continue;
        if (iou(g[i].box, h[j].box) >= iou_min) {
          g_used[i] = h_used[j] = 1;
          now[g[i].id] = h[j].id;
          ++matched;
        }
        break;
      }
    }

    std::vector<std::size_t> gs, hs;
    for (std::size_t i = 0; i < g.size(); ++i)
      if (!g_used[i]) gs.push_back(i);
    for (std::size_t j = 0; j < h.size(); ++j)
      if (!h_used[j]) hs.push_back(j);
    if (!gs.empty() && !hs.empty()) {
      CostMatrix cost(gs.size(), hs.size());
      for (std::size_t a = 0; a < gs.size(); ++a)
        for (std::size_t b = 0; b < hs.size(); ++b) {
          const double o = iou(g[gs[a]].box, h[hs[b]].box);
          cost(a, b) = o >= iou_min ? 1.0 - o : kBlocked;
        }
      for (const auto& [a, b] : hungarian(cost, 1.0 - iou_min + 1e-12).matches) {
        const int gid = g[gs[a]].id;
        const int hid = h[hs[b]].id;
        const auto last = last_match.find(gid);
        if (last != last_match.end() && last->second != hid) ++c.idsw;
        now[gid] = hid;
        ++matched;
      }
    }
    for (const auto& [gid, hid] : now) last_match[gid] = hid;
    current = std::move(now);

    c.tp += matched;
    c.fp += h.size() - matched;
    c.fn += g.size() - matched;
    c.gt_total += g.size();
  }
  const double errors = static_cast<double>(c.fn + c.fp + c.idsw);
  if (c.gt_total > 0)
    c.mota = 1.0 - errors / static_cast<double>(c.gt_total);
  else
    c.mota = errors == 0.0 ? 1.0 : -errors;
  return c;
}

IdCounts idf1(const std::vector<MotRecord>& gt, const std::vector<MotRecord>& result, double iou_min) {
  std::map<int, std::size_t> gt_index, res_index;
  for (const MotRecord& r : gt) gt_index.emplace(r.id, 0);
  for (const MotRecord& r : result) res_index.emplace(r.id, 0);
  std::size_t k = 0;
  for (auto& [id, idx] : gt_index) idx = k++;
  k = 0;
  for (auto& [id, idx] : res_index) idx = k++;

  std::vector<std::size_t> overlap(gt_index.size() * res_index.size(), 0);
  const auto gt_frames = by_frame_sorted(gt);
  const auto res_frames = by_frame_sorted(result);
  for (const auto& [f, g] : gt_frames) {
    const auto ri = res_frames.find(f);
    if (ri == res_frames.end()) continue;
    for (const MotRecord& a : g)
      for (const MotRecord& b : ri->second)
        if (iou(a.box, b.box) >= iou_min) ++overlap[gt_index[a.id] * res_index.size() + res_index[b.id]];
  }

  IdCounts c;
  if (!gt_index.empty() && !res_index.empty()) {
    std::size_t peak = 0;
    for (std::size_t v : overlap) peak = std::max(peak, v);
    CostMatrix cost(gt_index.size(), res_index.size());
    for (std::size_t i = 0; i < cost.rows; ++i)
      for (std::size_t j = 0; j < cost.cols; ++j)
        cost(i, j) = static_cast<double>(peak - overlap[i * cost.cols + j]);
    const std::vector<int> assign = solve_assignment(cost);
    for (std::size_t i = 0; i < cost.rows; ++i)
      if (assign[i] >= 0) c.idtp += overlap[i * cost.cols + static_cast<std::size_t>(assign[i])];
  }
  c.idfn = gt.size() - c.idtp;
  c.idfp = result.size() - c.idtp;
  const std::size_t denom = 2 * c.idtp + c.idfp + c.idfn;
  c.idf1 = denom == 0 ? 1.0 : 2.0 * static_cast<double>(c.idtp) / static_cast<double>(denom);
  return c;
}

MetricReport evaluate(const std::vector<MotRecord>& gt, const std::vector<MotRecord>& result,
                      double iou_min) {
  return {clear_mot(gt, result, iou_min), idf1(gt, result, iou_min)};
}

namespace {

std::vector<std::pair<std::string, std::string>> report_rows(const MetricReport& r) {
  char buf[64];
  auto ratio = [&buf](double v) {
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return std::string(buf);
  };
  return {
      {"MOTA", ratio(r.clear.mota)},          {"IDF1", ratio(r.id.idf1)},
      {"IDSW", std::to_string(r.clear.idsw)}, {"FP", std::to_string(r.clear.fp)},
      {"FN", std::to_string(r.clear.fn)},     {"TP", std::to_string(r.clear.tp)},
      {"GT", std::to_string(r.clear.gt_total)}, {"IDTP", std::to_string(r.id.idtp)},
      {"IDFP", std::to_string(r.id.idfp)},    {"IDFN", std::to_string(r.id.idfn)},
  };
}

}  // namespace

void write_report_table(std::ostream& out, const MetricReport& report) {
  char line[96];
  for (const auto& [name, value] : report_rows(report)) {
    std::snprintf(line, sizeof line, "%-6s %12s\n", name.c_str(), value.c_str());
    out << line;
  }
}

void write_report_csv(std::ostream& out, const MetricReport& report) {
  out << "metric,value\n";
  for (const auto& [name, value] : report_rows(report)) out << name << ',' << value << '\n';
}

}  // namespace mambatrack
