#include "frgd/synth_bench.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace frgd::synth {

Mode mode_from_string(const std::string& s) {
  if (s == "star_burst") return Mode::star_burst;
  if (s == "ring") return Mode::ring;
  if (s == "mixed") return Mode::mixed;
  throw InputError("unknown synth mode: " + s);
}

std::string to_string(Mode m) {
  switch (m) {
    case Mode::star_burst: return "star_burst";
    case Mode::ring: return "ring";
    case Mode::mixed: return "mixed";
  }
  return "?";
}

void SynthConfig::validate() const {
  if (n_reviewers < 1 || n_products < 1)
    throw InputError("synth: reviewer and product counts must be >= 1");
  if (days <= 0.0 || organic_rate <= 0.0)
    throw InputError("synth: days and organic_rate must be > 0");
  if (n_groups < 0 || group_size < 1 || targets_per_group < 1)
    throw InputError("synth: bad group shape");
  if (camouflage_rate < 0.0) throw InputError("synth: negative camouflage");
  double horizon = days * 86400.0;
  if (burst_window <= 0.0 || burst_window > horizon)
    throw InputError("synth: burst_window must be in (0, horizon]");
  if (n_groups * group_size > n_reviewers)
    throw InputError("synth: groups need more reviewers than configured");
  if (n_groups > 0 && targets_per_group > n_products)
    throw InputError("synth: more targets per group than products");
  if (n_groups > 0 && n_groups * targets_per_group >= n_products)
    throw InputError(
        "synth: organic traffic needs at least one product that is never "
        "a fraud target");
  if (n_groups > 0 && mode != Mode::star_burst &&
      burst_window * targets_per_group > horizon)
    throw InputError(
        "synth: ring schedule does not fit the horizon "
        "(burst_window * targets_per_group > days)");
}

std::string scale_of(long review_count) {
  if (review_count < 50) return "small";
  if (review_count <= 200) return "medium";
  return "large";
}

namespace {

struct Stub {
  double t = 0.0;
  int reviewer = -1;
  int product = -1;  // -1: assign by preferential attachment
  int rating = 0;
  int len = 0;
};

std::string pad_id(char prefix, int i, int n_total) {
  int width = 1;
  for (int v = n_total - 1; v >= 10; v /= 10) ++width;
  std::string digits = std::to_string(i);
  std::string out(1, prefix);
  out.append(width - digits.size(), '0');
  out += digits;
  return out;
}

int clip_rating(double r) {
  return int(std::clamp(std::lround(r), 1l, 5l));
}

}  // namespace

LabeledDataset generate(const SynthConfig& cfg) {
  cfg.validate();
  double horizon = cfg.days * 86400.0;

  Rng root(cfg.seed);
  Rng assign_rng = root.fork(1);
  Rng organic_rng = root.fork(2);
  Rng product_rng = root.fork(3);
  Rng fraud_rng = root.fork(4);
  Rng rating_rng = root.fork(5);

  // Which reviewers are fake, and in which group.
  std::vector<int> group_of(cfg.n_reviewers, -1);
  std::vector<std::vector<int>> members(cfg.n_groups);
  {
    std::vector<int> perm = assign_rng.permutation(cfg.n_reviewers);
    for (int g = 0; g < cfg.n_groups; ++g) {
      for (int k = 0; k < cfg.group_size; ++k) {
        int r = perm[g * cfg.group_size + k];
        group_of[r] = g;
        members[g].push_back(r);
      }
      std::sort(members[g].begin(), members[g].end());
    }
  }

  // Product-specific rating means for the organic background.
  std::vector<double> mu(cfg.n_products);
  for (double& v : mu) v = 2.5 + 2.3 * product_rng.next_double();

  // Intrinsic appeal. Popularity growth is counts * fitness, so a handful of
  // high-fitness products become blockbusters while low-fitness ones survive
  // on the exploration floor. The draw is clamped: with an unbounded fitness
  // ratio, linear preferential attachment condenses onto a single winner.
  std::vector<double> fitness(cfg.n_products);
  for (double& v : fitness)
    v = std::exp(std::clamp(product_rng.next_normal(0.0, 0.5), -1.0, 1.0));

  // Group targets: distinct products per group.
  std::vector<std::vector<int>> targets(cfg.n_groups);
  for (int g = 0; g < cfg.n_groups; ++g) {
    std::set<int> seen;
    while (int(seen.size()) < cfg.targets_per_group)
      seen.insert(int(product_rng.next_below(cfg.n_products)));
    targets[g].assign(seen.begin(), seen.end());
  }

  std::vector<Stub> stubs;

  // Organic arrivals (products assigned later, in time order).
  for (int r = 0; r < cfg.n_reviewers; ++r) {
    double rate = cfg.organic_rate *
                  (group_of[r] >= 0 ? cfg.camouflage_rate : 1.0);
    int emitted = 0;
    if (rate > 0.0) {
      double t_days = organic_rng.next_exponential(1.0 / rate);
      while (t_days < cfg.days) {
        stubs.push_back({t_days * 86400.0, r, -1, 0, 0});
        ++emitted;
        t_days += organic_rng.next_exponential(1.0 / rate);
      }
    }
    if (group_of[r] < 0 && emitted == 0)
      stubs.push_back({organic_rng.next_double() * horizon, r, -1, 0, 0});
  }

  // Planted fraud.
  for (int g = 0; g < cfg.n_groups; ++g) {
    Mode m = cfg.mode == Mode::mixed
                 ? (g % 2 == 0 ? Mode::star_burst : Mode::ring)
                 : cfg.mode;
    if (m == Mode::star_burst) {
      int min_k = int(std::ceil(0.8 * cfg.group_size));
      for (int p : targets[g]) {
        double start = fraud_rng.next_double() * (horizon - cfg.burst_window);
        int k =
            min_k + int(fraud_rng.next_below(cfg.group_size - min_k + 1));
        std::vector<int> order = fraud_rng.permutation(cfg.group_size);
        for (int i = 0; i < k; ++i) {
          int r = members[g][order[i]];
          double t = start + fraud_rng.next_double() * cfg.burst_window;
          int rating = 4 + int(fraud_rng.next_below(2));
          int len = 20 + int(fraud_rng.next_below(120));
          stubs.push_back({t, r, p, rating, len});
        }
      }
    } else {  // ring: every member hits every target, staggered across slots
      double slot = horizon / cfg.targets_per_group;
      for (int ti = 0; ti < cfg.targets_per_group; ++ti) {
        int p = targets[g][ti];
        double wstart = ti * slot + fraud_rng.next_double() *
                                        std::max(0.0, slot - cfg.burst_window);
        for (int i = 0; i < cfg.group_size; ++i) {
          int r = members[g][i];
          double offset = double((i + ti) % cfg.group_size) /
                          double(cfg.group_size) * cfg.burst_window;
          int rating = 4 + int(fraud_rng.next_below(2));
          int len = 20 + int(fraud_rng.next_below(120));
          stubs.push_back({wstart + offset, r, p, rating, len});
        }
      }
    }
  }

  // Fraud campaigns boost newly launched products: a target "launches" with
  // its first planted review and is invisible to organic preferential
  // attachment before that. Everything else is on the market from day one.
  std::vector<double> launch(cfg.n_products, 0.0);
  {
    for (int g = 0; g < cfg.n_groups; ++g)
      for (int p : targets[g]) launch[p] = horizon + 1.0;
    for (const Stub& s : stubs)
      if (s.product >= 0) launch[s.product] = std::min(launch[s.product], s.t);
  }

  // Every fake reviewer must end up with at least one review.
  {
    std::vector<int> cnt(cfg.n_reviewers, 0);
    for (const Stub& s : stubs) cnt[s.reviewer]++;
    for (int g = 0; g < cfg.n_groups; ++g) {
      for (int r : members[g]) {
        if (cnt[r] == 0) {
          int tp = targets[g][0];
          double t0 = std::min(launch[tp], horizon);
          int rating = 4 + int(fraud_rng.next_below(2));
          stubs.push_back({t0 + fraud_rng.next_double() * (horizon - t0), r,
                           tp, rating, 20 + int(fraud_rng.next_below(120))});
        }
      }
    }
  }

  std::sort(stubs.begin(), stubs.end(), [](const Stub& a, const Stub& b) {
    if (a.t != b.t) return a.t < b.t;
    if (a.reviewer != b.reviewer) return a.reviewer < b.reviewer;
    return a.product < b.product;
  });

  // Preferential attachment with add-one smoothing, swept in time order so
  // popularity accumulates. Only reviews by genuine accounts feed the
  // popularity counts: planted reviews inflate a product's page, not its
  // actual customer base. Organic picks only see products already launched
  // at the event time, and a fixed share of them browse uniformly instead of
  // by popularity so niche products keep a baseline audience (preferential
  // attachment with initial attractiveness).
  {
    constexpr double kExplore = 0.35;
    std::vector<double> counts(cfg.n_products, 1.0);
    std::vector<char> avail(cfg.n_products, 0);
    std::vector<int> by_launch(cfg.n_products);
    std::iota(by_launch.begin(), by_launch.end(), 0);
    std::stable_sort(by_launch.begin(), by_launch.end(),
                     [&](int a, int b) { return launch[a] < launch[b]; });
    size_t next_launch = 0;
    int n_avail = 0;
    double total = 0.0;

    for (Stub& s : stubs) {
      while (next_launch < by_launch.size() &&
             launch[by_launch[next_launch]] <= s.t) {
        int p = by_launch[next_launch++];
        avail[p] = 1;
        ++n_avail;
        total += fitness[p] * counts[p];
      }
      if (s.product < 0) {
        // Camouflage reviews from fake accounts stick to popular products
        // (padding with bestsellers draws less attention); genuine browsers
        // also explore the tail.
        bool explores = group_of[s.reviewer] < 0 &&
                        product_rng.next_double() < kExplore;
        int p = -1;
        if (explores) {
          int idx = int(product_rng.next_below(std::uint64_t(n_avail)));
          for (int q = 0; q < cfg.n_products; ++q) {
            if (!avail[q]) continue;
            if (idx-- == 0) {
              p = q;
              break;
            }
          }
        } else {
          double u = product_rng.next_double() * total;
          double acc = 0.0;
          for (int q = 0; q < cfg.n_products; ++q) {
            if (!avail[q]) continue;
            p = q;
            acc += fitness[q] * counts[q];
            if (u < acc) break;
          }
        }
        s.product = p;
        s.rating = clip_rating(rating_rng.next_normal(mu[p], 0.7));
        s.len = int(std::clamp(std::exp(rating_rng.next_normal(4.5, 0.8)),
                               20.0, 3000.0));
      }
      if (group_of[s.reviewer] < 0) {
        counts[s.product] += 1.0;
        if (avail[s.product]) total += fitness[s.product];
      }
    }
  }

  LabeledDataset d;
  d.graph.reviewer_ids.reserve(cfg.n_reviewers);
  for (int r = 0; r < cfg.n_reviewers; ++r)
    d.graph.reviewer_ids.push_back(pad_id('r', r, cfg.n_reviewers));
  d.graph.product_ids.reserve(cfg.n_products);
  for (int p = 0; p < cfg.n_products; ++p)
    d.graph.product_ids.push_back(pad_id('p', p, cfg.n_products));

  // Integer timestamps; bump exact (reviewer, product, second) collisions so
  // finalize() cannot collapse two distinct reviews.
  std::set<std::tuple<int, int, std::int64_t>> used;
  d.graph.events.reserve(stubs.size());
  for (const Stub& s : stubs) {
    std::int64_t ts = std::llround(s.t);
    while (!used.insert({s.reviewer, s.product, ts}).second) ++ts;
    graph::ReviewEvent e;
    e.reviewer = s.reviewer;
    e.product = s.product;
    e.timestamp = ts;
    e.rating = double(s.rating);
    e.content_len = s.len;
    d.graph.events.push_back(e);
  }
  d.graph.finalize();
  graph::raw_features(d.graph);

  for (int r = 0; r < cfg.n_reviewers; ++r) {
    const std::string& id = d.graph.reviewer_ids[r];
    d.labels[id] = group_of[r] >= 0 ? 1 : 0;
    if (group_of[r] >= 0) d.group_ids[id] = group_of[r];
  }
  d.group_targets.resize(cfg.n_groups);
  for (int g = 0; g < cfg.n_groups; ++g)
    for (int p : targets[g])
      d.group_targets[g].push_back(d.graph.product_ids[p]);

  std::vector<long> per_product(cfg.n_products, 0);
  for (const auto& e : d.graph.events) per_product[e.product]++;
  for (int p = 0; p < cfg.n_products; ++p)
    d.scale_split[d.graph.product_ids[p]] = scale_of(per_product[p]);
  return d;
}

std::string to_jsonl(const LabeledDataset& d) {
  std::ostringstream os;
  for (const auto& e : d.graph.events) {
    os << "{\"reviewer_id\":\"" << d.graph.reviewer_ids[e.reviewer]
       << "\",\"product_id\":\"" << d.graph.product_ids[e.product]
       << "\",\"timestamp\":" << e.timestamp
       << ",\"rating\":" << int(std::lround(e.rating))
       << ",\"content_len\":" << e.content_len << "}\n";
  }
  return os.str();
}

std::string labels_csv(const LabeledDataset& d) {
  std::ostringstream os;
  os << "reviewer_id,label,group_id\n";
  for (const std::string& id : d.graph.reviewer_ids) {
    auto lab = d.labels.find(id);
    auto grp = d.group_ids.find(id);
    os << id << ',' << (lab == d.labels.end() ? 0 : lab->second) << ','
       << (grp == d.group_ids.end() ? -1 : grp->second) << '\n';
  }
  return os.str();
}

std::string split_csv(const LabeledDataset& d) {
  std::ostringstream os;
  os << "product_id,scale\n";
  for (const std::string& id : d.graph.product_ids) {
    auto it = d.scale_split.find(id);
    os << id << ',' << (it == d.scale_split.end() ? "small" : it->second)
       << '\n';
  }
  return os.str();
}

}  // namespace frgd::synth
