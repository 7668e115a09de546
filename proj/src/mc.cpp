#include "vbs/mc.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <thread>

#include "vbs/errors.hpp"

namespace vbs {

namespace {

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

struct BatchResult {
  Eigen::MatrixXd re;
  Eigen::MatrixXd im;
  std::uint64_t proposed = 0;
  std::uint64_t accepted = 0;
};

// Converts coefficients of Pauli strings (digit 0, x, y, z per leg, leg 0 most
// significant) into the dense matrix they stand for.
void pauli_to_matrix(const std::vector<double>& coeff, int legs, Eigen::MatrixXd& re, Eigen::MatrixXd& im) {
  using C = std::complex<double>;
  std::vector<C> a(coeff.begin(), coeff.end());
  const std::size_t size = a.size();
  for (int k = 0; k < legs; ++k) {
    const std::size_t stride = std::size_t{1} << (2 * (legs - 1 - k));
    for (std::size_t base = 0; base < size; base += 4 * stride) {
      for (std::size_t off = 0; off < stride; ++off) {
        C* p = &a[base + off];
        const C c0 = p[0], cx = p[stride], cy = p[2 * stride], cz = p[3 * stride];
        // digit 2r + c holds the (r, c) entry of c0 + cx sx + cy sy + cz sz
        p[0] = c0 + cz;
        p[stride] = cx - C(0, 1) * cy;
        p[2 * stride] = cx + C(0, 1) * cy;
        p[3 * stride] = c0 - cz;
      }
    }
  }
  const Eigen::Index dim = Eigen::Index{1} << legs;
  re.resize(dim, dim);
  im.resize(dim, dim);
  for (std::size_t idx = 0; idx < size; ++idx) {
    Eigen::Index row = 0, col = 0;
    for (int k = 0; k < legs; ++k) {
      const std::size_t digit = (idx >> (2 * (legs - 1 - k))) & 3u;
      row = (row << 1) | static_cast<Eigen::Index>(digit >> 1);
      col = (col << 1) | static_cast<Eigen::Index>(digit & 1u);
    }
    re(row, col) = a[idx].real();
    im(row, col) = a[idx].imag();
  }
}

class Sampler {
 public:
  Sampler(const SymmetricGraph& g, const MCConfig& cfg) : g_(g), cfg_(cfg) {
    legs_ = g.boundary_size();
    size_ = std::size_t{1} << (2 * legs_);
    for (std::size_t idx = 0; idx < size_; ++idx) {
      int weight = 0;
      for (int k = 0; k < legs_; ++k)
        if ((idx >> (2 * k)) & 3u) ++weight;
      if (weight % 2 == 0) even_.push_back(idx);
    }
    neighbors_.resize(g.num_vertices());
    for (auto [i, j] : g.bonds) {
      neighbors_[i].push_back(j);
      neighbors_[j].push_back(i);
    }
  }

  BatchResult run_batch(std::uint64_t batch, std::uint64_t count) const {
    auto rng = batch_stream(cfg_.seed, batch);
    std::vector<double> acc(size_, 0.0);
    std::vector<double> tensor(size_);
    std::vector<UnitVector> omega(g_.num_vertices());
    BatchResult out;

    auto measure = [&](double w) {
      if (w == 0) return;
      tensor[0] = 1;
      std::size_t len = 1;
      for (int k = 0; k < legs_; ++k) {
        UnitVector o = omega[g_.boundary[k]];
        if (cfg_.rotation) o = *cfg_.rotation * o;
        for (std::size_t i = len; i-- > 0;) {
          const double t = tensor[i];
          tensor[4 * i] = t;
          tensor[4 * i + 1] = t * o.x();
          tensor[4 * i + 2] = t * o.y();
          tensor[4 * i + 3] = t * o.z();
        }
        len *= 4;
      }
      // Pairing each draw with its global antipode keeps the even strings only.
      for (std::size_t idx : even_) acc[idx] += w * tensor[idx];
    };

    if (cfg_.method == MCMethod::WeightedUniform) {
      for (std::uint64_t s = 0; s < count; ++s) {
        for (auto& o : omega) o = sample_sphere(rng);
        double w = 1;
        for (auto [i, j] : g_.bonds) w *= 1 - omega[i].dot(omega[j]);
        measure(w);
      }
    } else {
      for (auto& o : omega) o = sample_sphere(rng);
      const auto& mp = cfg_.metropolis;
      const double cos_step = std::cos(mp.step_angle);
      auto sweep = [&](bool count_moves) {
        for (int v = 0; v < g_.num_vertices(); ++v) {
          const UnitVector& cur = omega[v];
          const UnitVector helper = std::abs(cur.x()) < 0.9 ? UnitVector::UnitX() : UnitVector::UnitY();
          const UnitVector e1 = cur.cross(helper).normalized();
          const UnitVector e2 = cur.cross(e1);
          const double ca = cos_step + (1 - cos_step) * uniform01(rng);
          const double sa = std::sqrt(std::max(0.0, 1 - ca * ca));
          const double beta = 2 * std::numbers::pi * uniform01(rng);
          const UnitVector prop = (ca * cur + sa * (std::cos(beta) * e1 + std::sin(beta) * e2)).normalized();
          double num = 1, den = 1;
          for (int j : neighbors_[v]) {
            num *= 1 - prop.dot(omega[j]);
            den *= 1 - cur.dot(omega[j]);
          }
          const bool accept = den <= 0 || num >= den || uniform01(rng) * den < num;
          if (count_moves) {
            ++out.proposed;
            if (accept) ++out.accepted;
          }
          if (accept) omega[v] = prop;
        }
      };
      for (int b = 0; b < mp.burn_in; ++b) sweep(false);
      for (std::uint64_t s = 0; s < count; ++s) {
        for (int t = 0; t < std::max(1, mp.thinning); ++t) sweep(true);
        measure(1.0);
      }
    }
    for (double& x : acc) x /= static_cast<double>(count);
    pauli_to_matrix(acc, legs_, out.re, out.im);
    return out;
  }

 private:
  const SymmetricGraph& g_;
  const MCConfig& cfg_;
  int legs_ = 0;
  std::size_t size_ = 0;
  std::vector<std::size_t> even_;
  std::vector<std::vector<int>> neighbors_;
};

}  // namespace

UnitVector sample_sphere(std::mt19937_64& rng) {
  const double z = 2 * uniform01(rng) - 1;
  const double phi = 2 * std::numbers::pi * uniform01(rng);
  const double s = std::sqrt(std::max(0.0, 1 - z * z));
  return {s * std::cos(phi), s * std::sin(phi), z};
}

std::mt19937_64 batch_stream(std::uint64_t seed, std::uint64_t batch) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(batch), static_cast<std::uint32_t>(batch >> 32),
                    0x76627321u};
  return std::mt19937_64(seq);
}

OverlapEstimate estimate_z(const SymmetricGraph& graph, const MCConfig& cfg) {
  require_valid(graph);
  const int legs = graph.boundary_size();
  if (legs < 1) throw UsageError("estimate_z: graph has no boundary");
  if (legs > kMaxMonteCarloBoundary)
    throw UsageError("estimate_z: boundary of " + std::to_string(legs) + " sites exceeds the limit of " +
                     std::to_string(kMaxMonteCarloBoundary));
  if (cfg.batches < 8) throw UsageError("MCConfig: need at least 8 batches");
  if (cfg.samples == 0 || cfg.samples % cfg.batches != 0)
    throw UsageError("MCConfig: samples must be a positive multiple of batches");
  if (cfg.method == MCMethod::Metropolis &&
      (cfg.metropolis.step_angle <= 0 || cfg.metropolis.burn_in < 0 || cfg.metropolis.thinning < 1))
    throw UsageError("MCConfig: bad Metropolis parameters");

  const Sampler sampler(graph, cfg);
  const std::uint64_t per_batch = cfg.samples / cfg.batches;
  const Eigen::Index dim = Eigen::Index{1} << legs;
  const bool keep_batches = dim <= 256;

  unsigned workers = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, cfg.batches));

  OverlapEstimate est;
  est.dim = static_cast<int>(dim);
  est.boundary_size = legs;
  est.config = cfg;
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::MatrixXd m2 = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::MatrixXd im_mean = Eigen::MatrixXd::Zero(dim, dim);
  std::uint64_t proposed = 0, accepted = 0;

  // Waves of `workers` batches; reduction always runs in batch order.
  std::uint64_t done = 0;
  for (std::uint64_t first = 0; first < cfg.batches; first += workers) {
    const std::uint64_t wave = std::min<std::uint64_t>(workers, cfg.batches - first);
    std::vector<BatchResult> results(wave);
    if (wave == 1) {
      results[0] = sampler.run_batch(first, per_batch);
    } else {
      std::vector<std::thread> pool;
      std::vector<std::exception_ptr> errors(wave);
      for (std::uint64_t w = 0; w < wave; ++w) {
        pool.emplace_back([&, w] {
          try {
            results[w] = sampler.run_batch(first + w, per_batch);
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
      for (auto& t : pool) t.join();
      for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    }
    for (auto& r : results) {
      ++done;
      const Eigen::MatrixXd delta = r.re - mean;
      mean += delta / static_cast<double>(done);
      m2 += delta.cwiseProduct(r.re - mean);
      im_mean += (r.im - im_mean) / static_cast<double>(done);
      proposed += r.proposed;
      accepted += r.accepted;
      if (keep_batches) est.batch_means.push_back((r.re + r.re.transpose()) / 2);
    }
  }

  const double b = static_cast<double>(cfg.batches);
  est.stderr_ = (m2 / (b * (b - 1))).cwiseMax(0.0).cwiseSqrt();
  est.stderr_ = (est.stderr_ + est.stderr_.transpose()) / 2;
  est.mean = (mean + mean.transpose()) / 2;
  est.max_imag = im_mean.cwiseAbs().maxCoeff();
  est.acceptance_rate = proposed ? static_cast<double>(accepted) / static_cast<double>(proposed) : 1.0;

  if (cfg.method == MCMethod::Metropolis && (est.acceptance_rate < 0.05 || est.acceptance_rate > 0.95)) {
    std::ostringstream msg;
    msg << "Metropolis acceptance rate " << est.acceptance_rate
        << " outside [0.05, 0.95]; adjust step_angle (now " << cfg.metropolis.step_angle << ")";
    throw NumericalError(msg.str());
  }
  const double max_err = est.stderr_.maxCoeff();
  if (est.max_imag > 5 * max_err && est.max_imag > 1e-12 * est.mean.cwiseAbs().maxCoeff()) {
    std::ostringstream msg;
    msg << "estimate_z: imaginary residual " << est.max_imag << " exceeds 5x the largest standard error "
        << max_err;
    throw NumericalError(msg.str());
  }
  return est;
}

MCEntropy mc_entropy(const OverlapEstimate& est) {
  MCEntropy out;
  out.spectrum = entropy_of_matrix(est.mean, est.boundary_size);
  const double propagated = est.stderr_.norm();
  const double d_min = out.spectrum.eigenvalues.back();
  if (d_min < 0 && -d_min > 3 * propagated) {
    std::ostringstream msg;
    msg << "negative eigenvalue " << d_min << " beyond 3x propagated error " << propagated;
    out.spectrum.warnings.push_back(msg.str());
  }
  const std::size_t nb = est.batch_means.size();
  if (nb >= 2) {
    const double b = static_cast<double>(nb);
    Eigen::MatrixXd total = Eigen::MatrixXd::Zero(est.dim, est.dim);
    for (const auto& m : est.batch_means) total += m;
    std::vector<double> s(nb);
    double s_bar = 0;
    for (std::size_t i = 0; i < nb; ++i) {
      const Eigen::MatrixXd loo = (total - est.batch_means[i]) / (b - 1);
      s[i] = entropy_of_matrix(loo, est.boundary_size).entropy;
      s_bar += s[i] / b;
    }
    double var = 0;
    for (double x : s) var += (x - s_bar) * (x - s_bar);
    out.entropy_stderr = std::sqrt(var * (b - 1) / b);
  } else {
    out.spectrum.warnings.push_back("entropy error unavailable: batch means not retained");
  }
  out.per_bond_stderr = est.boundary_size ? out.entropy_stderr / est.boundary_size : 0.0;
  return out;
}

}  // namespace vbs
