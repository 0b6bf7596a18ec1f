#include "cavityqc/integrator.hpp"

#include <algorithm>
#include <future>
#include <sstream>

#include "cavityqc/format.hpp"

namespace cavityqc {

TraceProjector TraceProjector::composite(std::string label, BasisLabel basis) {
    TraceProjector p;
    p.kind = Kind::CompositeBasis;
    p.label = std::move(label);
    p.basis = std::move(basis);
    return p;
}

TraceProjector TraceProjector::pair_bare(AtomLevel level, int photons) {
    TraceProjector p;
    p.kind = Kind::PairBare;
    p.level = level;
    p.photons = photons;
    p.label = std::string(1, to_char(level)) + std::to_string(photons);
    return p;
}

TraceProjector TraceProjector::pair_dressed(int n, Branch branch) {
    TraceProjector p;
    p.kind = Kind::PairDressed;
    p.n = n;
    p.branch = branch;
    p.label = std::string("V") + branch_char(branch) + "(" + std::to_string(n) + ")";
    return p;
}

void TraceLog::to_csv(std::ostream& os) const {
    os << 't';
    for (const auto& l : labels) os << ',' << l;
    os << ",norm\n";
    for (std::size_t i = 0; i < times.size(); ++i) {
        os << format_g12(times[i]);
        for (Eigen::Index j = 0; j < populations.cols(); ++j) {
            os << ',' << format_g12(populations(static_cast<Eigen::Index>(i), j));
        }
        os << ',' << format_g12(norms[i]) << '\n';
    }
}

namespace {

class TraceSampler {
public:
    TraceSampler(const TraceRequest& request, const CompiledPairHamiltonian& ham,
                 const SystemLayout& layout, double t0, double t1)
        : request_(request), ham_(ham), layout_(layout), t0_(t0), t1_(t1) {
        log_.labels.reserve(request.projectors.size());
        for (const auto& p : request.projectors) log_.labels.push_back(p.label);
        const int count = std::max(request.samples, 2);
        log_.times.reserve(count);
        log_.norms.reserve(count);
        rows_.reserve(count);
        samples_ = count;
    }

    double next_time() const {
        if (next_index_ >= samples_) return std::numeric_limits<double>::infinity();
        return t0_ + (t1_ - t0_) * next_index_ / (samples_ - 1);
    }

    void record(double t, const Eigen::VectorXcd& y) {
        const double eps = 1e-9 * (t1_ - t0_);
        while (next_index_ < samples_ && t >= next_time() - eps) {
            sample(t, y);
            ++next_index_;
        }
    }

    TraceLog take(double drift) {
        log_.populations.resize(static_cast<Eigen::Index>(rows_.size()),
                                static_cast<Eigen::Index>(request_.projectors.size()));
        for (std::size_t i = 0; i < rows_.size(); ++i) {
            for (std::size_t j = 0; j < rows_[i].size(); ++j) {
                log_.populations(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                    rows_[i][j];
            }
        }
        log_.norm_drift = drift;
        return std::move(log_);
    }

private:
    void sample(double t, const Eigen::VectorXcd& y) {
        std::vector<double> row(request_.projectors.size(), 0.0);
        const auto& indexer = ham_.indexer();
        for (std::size_t j = 0; j < request_.projectors.size(); ++j) {
            const auto& p = request_.projectors[j];
            switch (p.kind) {
                case TraceProjector::Kind::CompositeBasis:
                    row[j] = std::norm(y(layout_.index_of(p.basis)));
                    break;
                case TraceProjector::Kind::PairBare: {
                    const int offset =
                        indexer.offset(static_cast<int>(p.level) * indexer.cutoff() + p.photons);
                    double acc = 0.0;
                    for (int r = 0; r < indexer.spectator_count(); ++r) {
                        acc += std::norm(y(indexer.spectator_base(r) + offset));
                    }
                    row[j] = acc;
                    break;
                }
                case TraceProjector::Kind::PairDressed: {
                    const auto& spec = ham_.spec();
                    const DressedLevel level = dressed_level(
                        spec.coupling, spec.detuning.effective(t), p.n, p.branch, t);
                    const Eigen::VectorXcd v = level.pair_vector(indexer.cutoff());
                    double acc = 0.0;
                    for (int r = 0; r < indexer.spectator_count(); ++r) {
                        Complex amp = 0.0;
                        for (int q = 0; q < indexer.pair_dim(); ++q) {
                            if (v(q) != 0.0) amp += std::conj(v(q)) * y(indexer.index(q, r));
                        }
                        acc += std::norm(amp);
                    }
                    row[j] = acc;
                    break;
                }
            }
        }
        log_.times.push_back(t);
        log_.norms.push_back(y.norm());
        rows_.push_back(std::move(row));
    }

    const TraceRequest& request_;
    const CompiledPairHamiltonian& ham_;
    const SystemLayout& layout_;
    double t0_, t1_;
    int samples_ = 0;
    int next_index_ = 0;
    TraceLog log_;
    std::vector<std::vector<double>> rows_;
};

}  // namespace

EvolveResult evolve(const StateVector& state, const CompiledPairHamiltonian& ham,
                    const EvolutionWindow& window) {
    Eigen::VectorXcd y = state.amplitudes();
    Eigen::MatrixXcd block;
    const auto apply = [&](double t, const Eigen::VectorXcd& in, Eigen::VectorXcd& out) {
        ham.apply(t, in, out, block);
    };

    std::pair<long, long> counts;
    TraceLog trace;
    double drift = 0.0;
    const double drift_limit = std::max(1e-8, 20.0 * window.rel_tol);
    if (window.record) {
        TraceSampler sampler(*window.record, ham, state.layout(), window.t_start, window.t_end);
        counts = detail::rk45_complex(apply, y, window.t_start, window.t_end, window.rel_tol,
                                      window.max_step, ham.rate_scale(), sampler);
        drift = std::abs(y.norm() - 1.0);
        trace = sampler.take(drift);
        for (double n : trace.norms) drift = std::max(drift, std::abs(n - 1.0));
        trace.norm_drift = drift;
    } else {
        detail::NullSampler sampler;
        counts = detail::rk45_complex(apply, y, window.t_start, window.t_end, window.rel_tol,
                                      window.max_step, ham.rate_scale(), sampler);
        drift = std::abs(y.norm() - 1.0);
    }
    if (drift > drift_limit) {
        std::ostringstream os;
        os << "norm drift " << drift << " exceeds " << drift_limit << " after "
           << counts.first << " steps (" << counts.second << " rejected)";
        throw NumericalFailure(os.str());
    }

    EvolveResult result{StateVector::unchecked(state.layout(), std::move(y)), std::move(trace),
                        counts.first, counts.second, drift};
    return result;
}

PropagatorResult propagator(const SystemLayout& layout, const PairHamiltonian& ham,
                            const EvolutionWindow& window, const std::vector<BasisLabel>& subspace,
                            int jobs) {
    const int dim = layout.dimension();
    const int cols = static_cast<int>(subspace.size());
    PropagatorResult result;
    result.matrix.resize(dim, cols);

    const CompiledPairHamiltonian compiled(layout, ham);
    EvolutionWindow w = window;
    w.record.reset();

    const auto run_column = [&](int k) {
        const StateVector in = StateVector::basis_state(layout, subspace[k]);
        return evolve(in, compiled, w).state.amplitudes();
    };

    if (jobs > 1 && cols > 1) {
        std::vector<std::future<Eigen::VectorXcd>> futures(cols);
        for (int k = 0; k < cols; ++k) {
            futures[k] = std::async(std::launch::async, run_column, k);
        }
        for (int k = 0; k < cols; ++k) result.matrix.col(k) = futures[k].get();
    } else {
        for (int k = 0; k < cols; ++k) result.matrix.col(k) = run_column(k);
    }

    // Unitarity defect restricted to the evolved columns.
    Eigen::MatrixXcd gram = result.matrix.adjoint() * result.matrix;
    gram -= Eigen::MatrixXcd::Identity(cols, cols);
    result.unitarity_defect = gram.cwiseAbs().maxCoeff();
    return result;
}

}  // namespace cavityqc
