#include <algorithm>
#include <cmath>
#include <future>
#include <limits>

#include "ccn/continuation.hpp"
#include "ccn/errors.hpp"

namespace ccn {

namespace {

// One fold-free piece of a branch, sorted by lambda.
struct Segment {
    std::vector<double> lambda;
    std::vector<const Vector*> u;
};

std::vector<Segment> split_at_folds(const Branch& br) {
    std::vector<Segment> out;
    std::size_t begin = 0;
    auto flush = [&](std::size_t end) {
        if (end <= begin) return;
        std::vector<std::size_t> idx;
        for (std::size_t i = begin; i < end; ++i) idx.push_back(i);
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            return br.points[a].solution.lambda < br.points[b].solution.lambda;
        });
        Segment seg;
        for (std::size_t i : idx) {
            seg.lambda.push_back(br.points[i].solution.lambda);
            seg.u.push_back(&br.points[i].solution.u);
        }
        out.push_back(std::move(seg));
    };
    for (std::size_t k : br.folds) {
        flush(k + 1);
        begin = k + 1;
    }
    flush(br.points.size());
    return out;
}

Vector interpolate(const Segment& seg, double lambda) {
    const auto it = std::lower_bound(seg.lambda.begin(), seg.lambda.end(), lambda);
    if (it == seg.lambda.begin()) return *seg.u.front();
    if (it == seg.lambda.end()) return *seg.u.back();
    const std::size_t j = static_cast<std::size_t>(it - seg.lambda.begin());
    const double l0 = seg.lambda[j - 1];
    const double l1 = seg.lambda[j];
    const double w = l1 > l0 ? (lambda - l0) / (l1 - l0) : 0.0;
    return (1.0 - w) * *seg.u[j - 1] + w * *seg.u[j];
}

// Interpolated guess, polished to an exact solution at this lambda when a spec is given.
Vector sample(const Segment& seg, double lambda, const ProblemSpec* spec) {
    Vector guess = interpolate(seg, lambda);
    if (!spec) return guess;
    try {
        return newton_solve(*spec, lambda, guess).u;
    } catch (const Error&) {
        return guess;
    }
}

double distance_impl(const Branch& b1, const Branch& b2, int grid_points, const ProblemSpec* template_spec) {
    if (grid_points < 2) throw ContractError("branch_distance requires at least 2 grid points");
    const auto s1 = split_at_folds(b1);
    const auto s2 = split_at_folds(b2);
    std::optional<ProblemSpec> spec1, spec2;
    if (template_spec) {
        spec1 = template_spec->with_eps(b1.eps);
        spec2 = template_spec->with_eps(b2.eps);
    }

    double dist = -1.0;
    for (std::size_t k = 0; k < std::min(s1.size(), s2.size()); ++k) {
        const double lo = std::max(s1[k].lambda.front(), s2[k].lambda.front());
        const double hi = std::min(s1[k].lambda.back(), s2[k].lambda.back());
        if (!(hi >= lo)) continue;
        for (int g = 0; g < grid_points; ++g) {
            const double lambda = lo + (hi - lo) * g / (grid_points - 1);
            const Vector u1 = sample(s1[k], lambda, spec1 ? &*spec1 : nullptr);
            const Vector u2 = sample(s2[k], lambda, spec2 ? &*spec2 : nullptr);
            dist = std::max(dist, (u1 - u2).lpNorm<Eigen::Infinity>());
        }
    }
    return dist < 0.0 ? std::numeric_limits<double>::infinity() : dist;
}

Branch trace_from_zero(const ProblemSpec& spec, const WhyburnOptions& opts) {
    const BranchPoint start = start_from_zero(spec, opts.dlambda_sign, opts.trace.ds, opts.trace.newton_tol);
    return trace_branch(spec, start, opts.trace);
}

}  // namespace

double branch_distance(const Branch& b1, const Branch& b2, int grid_points) {
    return distance_impl(b1, b2, grid_points, nullptr);
}

WhyburnReport whyburn_limit(const ProblemSpec& spec_template, const std::vector<double>& eps_schedule,
                            const WhyburnOptions& opts) {
    if (eps_schedule.size() < 2) throw ConfigError("eps_schedule needs at least two values");
    for (std::size_t i = 0; i < eps_schedule.size(); ++i) {
        if (!(eps_schedule[i] > 0.0 && eps_schedule[i] <= 1.0)) throw ConfigError("eps_schedule values must lie in (0, 1]");
        if (i > 0 && !(eps_schedule[i] < eps_schedule[i - 1]))
            throw ConfigError("eps_schedule must be strictly decreasing");
    }

    WhyburnReport rep;
    rep.eps_schedule = eps_schedule;

    std::vector<ProblemSpec> specs;
    for (double e : eps_schedule) specs.push_back(spec_template.with_eps(e));

    const auto policy = opts.parallel ? std::launch::async : std::launch::deferred;
    std::vector<std::future<Branch>> jobs;
    for (const auto& s : specs) jobs.push_back(std::async(policy, [&s, &opts] { return trace_from_zero(s, opts); }));
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        try {
            rep.branches.push_back(jobs[i].get());
        } catch (const Error& e) {
            if (!rep.failure) rep.failure = "eps = " + std::to_string(eps_schedule[i]) + ": " + e.what();
            // later branches are still collected so the report stays as complete as possible
            for (std::size_t j = i + 1; j < jobs.size(); ++j) {
                try {
                    jobs[j].get();
                } catch (const Error&) {
                }
            }
            break;
        }
    }

    for (std::size_t i = 1; i < rep.branches.size(); ++i)
        rep.pairwise_distances.push_back(
            distance_impl(rep.branches[i - 1], rep.branches[i], opts.grid_points, &spec_template));

    bool ok = !rep.failure && rep.pairwise_distances.size() + 1 == eps_schedule.size();
    for (std::size_t i = 0; ok && i < rep.pairwise_distances.size(); ++i) {
        if (!std::isfinite(rep.pairwise_distances[i])) ok = false;
        if (i > 0 && !(rep.pairwise_distances[i] < rep.pairwise_distances[i - 1])) ok = false;
    }
    rep.converged = ok && rep.pairwise_distances.back() <= opts.tol;

    if (!rep.branches.empty()) {
        rep.limit_branch = rep.branches.back();
        for (const auto& pt : rep.limit_branch.points) {
            std::vector<std::size_t> nodes;
            for (Eigen::Index i = 0; i < pt.solution.u.size(); ++i)
                if (pt.solution.u[i] < opts.dead_core_tol) nodes.push_back(static_cast<std::size_t>(i));
            rep.dead_core_nodes.push_back(std::move(nodes));
        }
    }
    return rep;
}

}  // namespace ccn
