#include "cmdp/sim.hpp"

#include "cmdp/error.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

namespace cmdp {

namespace {

constexpr Index kBlockSize = 1024;

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

/// Sparse successor lists with the absorption remainder implied.
struct SparseKernel {
  std::vector<std::vector<std::pair<Index, double>>> rows;

  explicit SparseKernel(const FiniteMdpModel& model) : rows(static_cast<std::size_t>(model.num_pairs())) {
    for (Index k = 0; k < model.num_pairs(); ++k)
      for (Index y = 0; y < model.num_states(); ++y)
        if (model.p(k, y) > 0.0) rows[k].emplace_back(y, model.p(k, y));
  }

  /// Next state, or -1 for the cemetery.
  Index sample(Index k, double u) const {
    double acc = 0.0;
    for (const auto& [y, prob] : rows[k]) {
      acc += prob;
      if (u < acc) return y;
    }
    return -1;
  }
};

Index sample_action(const FiniteMdpModel& model, const StationaryStrategy& s, Index x, double u) {
  double acc = 0.0;
  Index last = -1;
  for (Index k = model.pair_begin(x); k < model.pair_end(x); ++k) {
    if (!(s.probs[k] > 0.0)) continue;
    acc += s.probs[k];
    last = k;
    if (u < acc) return k;
  }
  return last;
}

struct Accumulator {
  Eigen::VectorXd pair_sum, pair_sq, state_sum, state_sq, cost_sum, cost_sq;
  std::map<Index, Index> times;
  Index capped = 0;

  Accumulator(Index pairs, Index states, Index costs)
      : pair_sum(Eigen::VectorXd::Zero(pairs)), pair_sq(Eigen::VectorXd::Zero(pairs)),
        state_sum(Eigen::VectorXd::Zero(states)), state_sq(Eigen::VectorXd::Zero(states)),
        cost_sum(Eigen::VectorXd::Zero(costs)), cost_sq(Eigen::VectorXd::Zero(costs)) {}

  void merge(const Accumulator& o) {
    pair_sum += o.pair_sum;
    pair_sq += o.pair_sq;
    state_sum += o.state_sum;
    state_sq += o.state_sq;
    cost_sum += o.cost_sum;
    cost_sq += o.cost_sq;
    for (const auto& [t, c] : o.times) times[t] += c;
    capped += o.capped;
  }
};

class TrajectorySampler {
public:
  TrajectorySampler(const FiniteMdpModel& model, const SimStrategy& strategy, Index step_cap)
      : model_(model), kernel_(model), strategy_(strategy), step_cap_(step_cap) {
    if (auto* phi = std::get_if<DeterministicStrategy>(&strategy)) {
      fixed_ = as_stationary(model, *phi);
    } else if (auto* mix = std::get_if<MixedStrategy>(&strategy)) {
      for (const auto& c : mix->components) components_.push_back(as_stationary(model, c.selector));
    }
  }

  void run(std::uint64_t seed, Index index, Accumulator& acc, Eigen::VectorXd& visits,
           Eigen::VectorXd& state_visits, Eigen::VectorXd& costs) const {
    std::mt19937_64 gen(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(index))));
    visits.setZero();
    state_visits.setZero();
    costs.setZero();

    const StationaryStrategy* stationary = nullptr;
    const MarkovStrategy* markov = nullptr;
    if (std::holds_alternative<DeterministicStrategy>(strategy_)) {
      stationary = &fixed_;
    } else if (auto* s = std::get_if<StationaryStrategy>(&strategy_)) {
      stationary = s;
    } else if (auto* m = std::get_if<MarkovStrategy>(&strategy_)) {
      markov = m;
    } else {
      const auto& mix = std::get<MixedStrategy>(strategy_);
      double u = uniform01(gen), acc_w = 0.0;
      std::size_t pick = components_.size() - 1;
      for (std::size_t l = 0; l < mix.components.size(); ++l) {
        acc_w += mix.components[l].weight;
        if (u < acc_w) {
          pick = l;
          break;
        }
      }
      stationary = &components_[pick];
    }

    Index x = model_.initial();
    Index steps = 0;
    bool absorbed = false;
    while (steps < step_cap_) {
      ++steps;
      const StationaryStrategy& s =
          markov ? markov->at_step(static_cast<std::size_t>(steps)) : *stationary;
      Index k = sample_action(model_, s, x, uniform01(gen));
      visits[k] += 1.0;
      state_visits[x] += 1.0;
      costs += model_.costs().col(k);
      x = kernel_.sample(k, uniform01(gen));
      if (x < 0) {
        absorbed = true;
        break;
      }
    }

    acc.pair_sum += visits;
    acc.pair_sq += visits.cwiseProduct(visits);
    acc.state_sum += state_visits;
    acc.state_sq += state_visits.cwiseProduct(state_visits);
    acc.cost_sum += costs;
    acc.cost_sq += costs.cwiseProduct(costs);
    if (absorbed)
      ++acc.times[steps];
    else
      ++acc.capped;
  }

private:
  const FiniteMdpModel& model_;
  SparseKernel kernel_;
  const SimStrategy& strategy_;
  Index step_cap_;
  StationaryStrategy fixed_;
  std::vector<StationaryStrategy> components_;
};

void validate(const FiniteMdpModel& model, const SimStrategy& strategy) {
  std::visit([&](const auto& s) { validate_strategy(model, s); }, strategy);
}

Eigen::VectorXd standard_error(const Eigen::VectorXd& sum, const Eigen::VectorXd& sq, Index n) {
  Eigen::VectorXd se(sum.size());
  const double nn = static_cast<double>(n);
  for (Index i = 0; i < sum.size(); ++i) {
    if (n < 2) {
      se[i] = 0.0;
      continue;
    }
    double mean = sum[i] / nn;
    double var = (sq[i] - nn * mean * mean) / (nn - 1.0);
    se[i] = std::sqrt(std::max(0.0, var) / nn);
  }
  return se;
}

}  // namespace

SimulationReport simulate(const FiniteMdpModel& model, const SimStrategy& strategy,
                          const SimulationOptions& options) {
  if (options.trajectories < 1) throw Error(ErrorCode::InvalidArgument, "need at least one trajectory");
  if (options.step_cap < 1) throw Error(ErrorCode::InvalidArgument, "step cap must be >= 1");
  validate(model, strategy);

  const Index n = options.trajectories;
  const Index blocks = (n + kBlockSize - 1) / kBlockSize;
  const Index pairs = model.num_pairs(), states = model.num_states(), costs = model.num_costs();
  TrajectorySampler sampler(model, strategy, options.step_cap);

  std::vector<Accumulator> partial(static_cast<std::size_t>(blocks), Accumulator(pairs, states, costs));
  std::atomic<Index> next{0};
  auto worker = [&] {
    Eigen::VectorXd visits(pairs), state_visits(states), cost(costs);
    for (Index b = next++; b < blocks; b = next++) {
      Index end = std::min(n, (b + 1) * kBlockSize);
      for (Index i = b * kBlockSize; i < end; ++i)
        sampler.run(options.seed, i, partial[b], visits, state_visits, cost);
    }
  };
  const unsigned threads = std::max(1u, options.threads);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  // Pairwise tree reduction in block order.
  for (Index width = 1; width < blocks; width *= 2)
    for (Index b = 0; b + width < blocks; b += 2 * width) partial[b].merge(partial[b + width]);
  const Accumulator& total = partial.front();

  SimulationReport r;
  r.trajectories = n;
  const double nn = static_cast<double>(n);
  r.occupation = total.pair_sum / nn;
  r.occupation_se = standard_error(total.pair_sum, total.pair_sq, n);
  r.marginal = total.state_sum / nn;
  r.marginal_se = standard_error(total.state_sum, total.state_sq, n);
  r.cost_mean = total.cost_sum / nn;
  r.cost_se = standard_error(total.cost_sum, total.cost_sq, n);
  r.absorption_times = total.times;
  r.capped = total.capped;
  return r;
}

SimulationReport report_from_measure(const FiniteMdpModel& model, const OccupationMeasure& m) {
  SimulationReport r;
  r.trajectories = 1;
  r.occupation = m.values;
  r.occupation_se = Eigen::VectorXd::Zero(m.values.size());
  r.marginal = marginal(model, m);
  r.marginal_se = Eigen::VectorXd::Zero(model.num_states());
  r.cost_mean = cost_vector(model, m);
  r.cost_se = Eigen::VectorXd::Zero(model.num_costs());
  return r;
}

double compare_empirical(const SimulationReport& report, const OccupationMeasure& m) {
  if (report.occupation.size() != m.values.size() || report.occupation_se.size() != m.values.size())
    throw Error(ErrorCode::ShapeMismatch, "report and occupation measure have different shapes");
  double worst = 0.0;
  for (Index k = 0; k < m.values.size(); ++k) {
    double diff = report.occupation[k] - m.values[k];
    double se = report.occupation_se[k];
    if (se > 0.0) {
      worst = std::max(worst, std::abs(diff) / se);
    } else if (std::abs(diff) > 1e-12) {
      return std::numeric_limits<double>::infinity();
    }
  }
  return worst;
}

}  // namespace cmdp
