#include "srplan/dse.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <numeric>
#include <cmath>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "srplan/error.hpp"
#include "srplan/io.hpp"
#include "srplan/perfmodel.hpp"

namespace srplan::dse {

using json = nlohmann::json;

bool dominates(const ParetoPoint& a, const ParetoPoint& b) {
  return a.psnr >= b.psnr && a.latency <= b.latency &&
         (a.psnr > b.psnr || a.latency < b.latency);
}

std::vector<ParetoPoint> pareto_prune(std::span<const ParetoPoint> points) {
  std::vector<ParetoPoint> kept;
  for (const auto& p : points) {
    const bool dominated = std::any_of(points.begin(), points.end(),
                                       [&](const ParetoPoint& q) { return dominates(q, p); });
    if (!dominated) {
      kept.push_back(p);
    }
  }
  std::stable_sort(kept.begin(), kept.end(), [](const ParetoPoint& a, const ParetoPoint& b) {
    return std::tie(a.latency, b.psnr, a.model) < std::tie(b.latency, a.psnr, b.model);
  });
  return kept;
}

namespace {

bool has_quality(const profile::QualityProfile& quality, const std::string& model) {
  return !quality.records.empty() &&
         std::all_of(quality.records.begin(), quality.records.end(),
                     [&](const profile::QualityRecord& r) { return r.psnr.contains(model); });
}

}  // namespace

std::vector<EngineFront> engine_fronts(const modelspace::Catalog& catalog,
                                       const profile::DeviceProfile& device,
                                       const profile::QualityProfile& quality) {
  std::vector<EngineFront> fronts;
  for (std::size_t e = 0; e < device.engines().size(); ++e) {
    EngineFront front;
    front.engine = device.engines()[e].name;
    for (const auto& m : catalog.models()) {
      const auto latency = device.latency(m.id, e);
      if (!latency || !has_quality(quality, m.id)) {
        continue;
      }
      const auto mean = scheduler::summarize_quality(
          quality.records.size(), [&](std::size_t i) { return quality.psnr(i, m.id); });
      front.points.push_back({m.id, mean.mean_db, *latency});
    }
    front.retained = pareto_prune(front.points);
    fronts.push_back(std::move(front));
  }
  return fronts;
}

std::vector<std::string> retained_models(const modelspace::Catalog& catalog,
                                         std::span<const EngineFront> fronts) {
  std::set<std::string, std::less<>> kept;
  for (const auto& f : fronts) {
    for (const auto& p : f.retained) {
      kept.insert(p.model);
    }
  }
  std::vector<std::string> out;
  for (const auto& m : catalog.models()) {
    if (kept.contains(m.id)) {
      out.push_back(m.id);
    }
  }
  return out;
}

void DseRequest::validate() const {
  if (std::isnan(eps_max_db) || eps_max_db < 0.0) {
    throw Error(ErrorKind::validation, "eps_max must be >= 0");
  }
  if (n_tv < 2) {
    throw Error(ErrorKind::validation, "n_tv must be >= 2");
  }
  if (catalog.find(reference) == nullptr) {
    throw Error(ErrorKind::validation, "reference model '" + reference + "' not in catalog");
  }
  if (quality.records.empty()) {
    throw Error(ErrorKind::validation, "quality profile has no records");
  }
  quality.validate_against(catalog);
  calibration.validate();
}

std::vector<Candidate> enumerate_designs(const DseRequest& request,
                                         std::span<const std::string> retained) {
  const auto thresholds = tv::candidate_thresholds(request.calibration, request.n_tv);
  std::vector<Candidate> out;
  for (const auto& m1 : retained) {
    const double p1 = request.catalog.at(m1).params_k;
    for (const auto& m2 : retained) {
      if (request.catalog.at(m2).params_k > p1) {
        continue;
      }
      for (const auto& thr : thresholds) {
        out.push_back({{m1, m2}, thr});
      }
    }
  }
  if (out.empty()) {
    throw Error(ErrorKind::validation,
                "design space is empty: no retained pair satisfies params(m2) <= params(m1)");
  }
  return out;
}

double reference_psnr(const DseRequest& request) {
  const auto tvs = request.quality.tv_values();
  const auto result = scheduler::schedule(tvs, {request.reference, request.reference},
                                          tv::TvThreshold::infinite(), request.device);
  return scheduler::quality_of_schedule(result, request.quality).mean_db;
}

namespace {

Design unavailable_design(const Candidate& c) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  return {c.pair.m1, c.pair.m2, c.thr.value(), inf, -inf, inf, false};
}

Design make_design(const Candidate& c, double latency, double psnr, double reference_db,
                   double eps_max) {
  Design d{c.pair.m1, c.pair.m2, c.thr.value(), latency, psnr, reference_db - psnr, false};
  // An infinite reference (every record lossless) only admits lossless designs.
  if (std::isinf(reference_db) && std::isinf(psnr)) {
    d.psnr_drop_db = 0.0;
  }
  d.feasible = d.psnr_drop_db <= eps_max;
  return d;
}

template <typename F>
std::vector<Design> evaluate_all(const std::vector<Candidate>& candidates, unsigned threads,
                                 F&& evaluate) {
  std::vector<Design> rows(candidates.size());
  const unsigned workers =
      std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(candidates.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      rows[i] = evaluate(candidates[i]);
    }
    return rows;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < candidates.size(); i = next++) {
        try {
          rows[i] = evaluate(candidates[i]);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) {
            failure = std::current_exception();
          }
        }
      }
    });
  }
  for (auto& t : pool) {
    t.join();
  }
  if (failure) {
    std::rethrow_exception(failure);
  }
  return rows;
}

}  // namespace

Design evaluate_design(const DseRequest& request, const Candidate& candidate,
                       double reference_psnr_db) {
  const auto tvs = request.quality.tv_values();
  try {
    const auto result = scheduler::schedule(tvs, candidate.pair, candidate.thr, request.device);
    const auto q = scheduler::quality_of_schedule(result, request.quality);
    return make_design(candidate, result.makespan_ms, q.mean_db, reference_psnr_db,
                       request.eps_max_db);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::unavailable) {
      throw;
    }
    return unavailable_design(candidate);
  }
}

bool ranks_before(const Design& a, const Design& b) {
  // Lower PSNR sorts later, so compare negated PSNR.
  return std::make_tuple(!a.feasible, a.latency_ms, -a.psnr_db, a.m1, a.m2, a.thr) <
         std::make_tuple(!b.feasible, b.latency_ms, -b.psnr_db, b.m1, b.m2, b.thr);
}

SearchResult search(const DseRequest& request, const SearchOptions& options) {
  request.validate();
  SearchResult out;
  out.fronts = engine_fronts(request.catalog, request.device, request.quality);
  out.retained = retained_models(request.catalog, out.fronts);
  out.reference_psnr_db = reference_psnr(request);

  auto candidates = enumerate_designs(request, out.retained);

  if (options.fast_screen) {
    const auto tvs = request.quality.tv_values();
    auto screened = evaluate_all(candidates, options.threads, [&](const Candidate& c) {
      try {
        const auto est = perfmodel::strict_split_estimate(tvs, c.pair, c.thr, request.device);
        const auto q = perfmodel::strict_split_quality(request.quality, c.pair, c.thr);
        return make_design(c, est.latency_ms, q.mean_db, out.reference_psnr_db,
                           request.eps_max_db);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::unavailable) {
          throw;
        }
        return unavailable_design(c);
      }
    });
    std::vector<std::size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return ranks_before(screened[a], screened[b]);
    });
    const std::size_t keep = std::max<std::size_t>(1, (candidates.size() + 9) / 10);
    std::vector<Candidate> top;
    for (std::size_t k = 0; k < keep; ++k) {
      top.push_back(candidates[order[k]]);
    }
    candidates = std::move(top);
  }

  out.table = evaluate_all(candidates, options.threads, [&](const Candidate& c) {
    return evaluate_design(request, c, out.reference_psnr_db);
  });
  std::sort(out.table.begin(), out.table.end(), ranks_before);

  if (out.table.front().feasible) {
    out.status = SearchStatus::feasible;
    out.best = out.table.front();
  } else {
    out.status = SearchStatus::no_feasible;
    out.best = *std::min_element(out.table.begin(), out.table.end(),
                                 [](const Design& a, const Design& b) {
                                   return std::make_tuple(a.psnr_drop_db, a.latency_ms, a.m1,
                                                          a.m2, a.thr) <
                                          std::make_tuple(b.psnr_drop_db, b.latency_ms, b.m1,
                                                          b.m2, b.thr);
                                 });
  }
  return out;
}

json to_json(const Design& d) {
  return {{"m1", d.m1},
          {"m2", d.m2},
          {"thr", io::number_json(d.thr)},
          {"latency_ms", io::number_json(d.latency_ms)},
          {"psnr_db", io::number_json(d.psnr_db)},
          {"psnr_drop_db", io::number_json(d.psnr_drop_db)},
          {"feasible", d.feasible}};
}

json to_json(const SearchResult& result) {
  json table = json::array();
  for (const auto& d : result.table) {
    table.push_back(to_json(d));
  }
  json fronts = json::array();
  for (const auto& f : result.fronts) {
    json kept = json::array();
    for (const auto& p : f.retained) {
      kept.push_back({{"model", p.model},
                      {"psnr_db", io::number_json(p.psnr)},
                      {"latency_ms", io::number_json(p.latency)}});
    }
    fronts.push_back({{"engine", f.engine}, {"retained", kept}});
  }
  return {{"status", result.status == SearchStatus::feasible ? "feasible" : "no_feasible"},
          {"best", to_json(result.best)},
          {"reference_psnr_db", io::number_json(result.reference_psnr_db)},
          {"retained", result.retained},
          {"fronts", fronts},
          {"table", table}};
}

std::string table_csv(std::span<const Design> table) {
  std::ostringstream out;
  out << "m1,m2,thr,latency_ms,psnr_db,psnr_drop_db,feasible\n";
  for (const auto& d : table) {
    out << d.m1 << ',' << d.m2 << ',' << io::format_number(d.thr) << ','
        << io::format_number(d.latency_ms) << ',' << io::format_number(d.psnr_db) << ','
        << io::format_number(d.psnr_drop_db) << ',' << (d.feasible ? 1 : 0) << '\n';
  }
  return out.str();
}

std::string fronts_csv(std::span<const EngineFront> fronts) {
  std::ostringstream out;
  out << "engine,model,psnr_db,latency_ms\n";
  for (const auto& f : fronts) {
    for (const auto& p : f.retained) {
      out << f.engine << ',' << p.model << ',' << io::format_number(p.psnr) << ','
          << io::format_number(p.latency) << '\n';
    }
  }
  return out.str();
}

}  // namespace srplan::dse
