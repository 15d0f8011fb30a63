#include "bandedge/path_oracle.hpp"

#include "bandedge/cheby.hpp"
#include "bandedge/errors.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace bandedge {

void KPathSpec::check() const {
    if (lengths.empty()) throw DomainError("a k-path needs k >= 1 lengths");
    if (!std::is_sorted(lengths.begin(), lengths.end())) {
        throw DomainError(fmt::format("lengths must be ascending, got [{}]", fmt::join(lengths, ",")));
    }
    if (lengths.front() < 1) throw DomainError("path lengths must be positive");
}

int KPathSpec::total_length() const {
    return std::accumulate(lengths.begin(), lengths.end(), 0);
}

KPathSpec make_spec(std::vector<int> lengths, SymmetryClass symmetry) {
    std::sort(lengths.begin(), lengths.end());
    KPathSpec spec{std::move(lengths), symmetry};
    spec.check();
    return spec;
}

namespace {

using Edge = std::pair<Vertex, Vertex>;

Edge undirected(Vertex a, Vertex b) { return std::minmax(a, b); }

// Per-step edge key a * N + b (a < b) and direction +1 for a -> b, -1 for b -> a.
struct Step {
    std::size_t key;
    int direction;
};

std::vector<Step> steps_of(const Path& path, Vertex N) {
    std::vector<Step> out;
    out.reserve(path.size());
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        const auto [a, b] = undirected(path[i], path[i + 1]);
        out.push_back({static_cast<std::size_t>(a * N + b), path[i] < path[i + 1] ? 1 : -1});
    }
    return out;
}

// Running totals of condition (d) over the edges of a partial tuple.
class Balance {
public:
    Balance(Vertex N, SymmetryClass symmetry)
        : symmetry_(symmetry), flow_(static_cast<std::size_t>(N * N), 0) {}

    void apply(const std::vector<Step>& steps, int sign) {
        for (const auto& s : steps) {
            int& f = flow_[s.key];
            const bool was_ok = ok(f);
            f += sign * (symmetry_ == SymmetryClass::signs ? 1 : s.direction);
            const bool now_ok = ok(f);
            unbalanced_ += static_cast<int>(was_ok) - static_cast<int>(now_ok);
        }
    }

    bool balanced() const noexcept { return unbalanced_ == 0; }

private:
    bool ok(int f) const noexcept { return symmetry_ == SymmetryClass::signs ? f % 2 == 0 : f == 0; }

    SymmetryClass symmetry_;
    std::vector<int> flow_;
    int unbalanced_ = 0;
};

void check_budget(const BandParams& params, const KPathSpec& spec, const OracleBudget& budget) {
    params.check();
    spec.check();
    if (params.n_sites > budget.max_sites) {
        throw ResourceError(fmt::format("N = {} exceeds the oracle budget of {} sites",
                                        params.n_sites, budget.max_sites));
    }
    if (spec.total_length() > budget.max_total_length) {
        throw ResourceError(fmt::format("total length {} exceeds the oracle budget of {}",
                                        spec.total_length(), budget.max_total_length));
    }
}

// Enumerates valid tuples as pointers into per-length path lists.
class TupleEnumerator {
public:
    TupleEnumerator(const BandParams& params, const KPathSpec& spec, const OracleBudget& budget)
        : spec_(spec), balance_(params.n_sites, spec.symmetry) {
        check_budget(params, spec, budget);
        double tuples = 1.0;
        for (int n : spec.lengths) {
            if (paths_.count(n) == 0) {
                auto& list = paths_[n];
                list = closed_nb_paths(params, n, budget);
                auto& steps = steps_[n];
                for (const auto& p : list) steps.push_back(steps_of(p, params.n_sites));
            }
            tuples *= static_cast<double>(paths_[n].size());
        }
        if (tuples > budget.max_tuples) {
            throw ResourceError(fmt::format("{} candidate k-paths exceed the tuple budget {}", tuples,
                                            budget.max_tuples));
        }
        current_.resize(spec.lengths.size());
        current_steps_.resize(spec.lengths.size());
    }

    template <class Visit>
    void run(Visit&& visit) {
        descend(0, visit);
    }

private:
    template <class Visit>
    void descend(std::size_t j, Visit& visit) {
        if (j == spec_.lengths.size()) {
            if (balance_.balanced()) visit(std::as_const(current_), std::as_const(current_steps_));
            return;
        }
        const int n = spec_.lengths[j];
        const auto& list = paths_.at(n);
        const auto& steps = steps_.at(n);
        for (std::size_t i = 0; i < list.size(); ++i) {
            current_[j] = &list[i];
            current_steps_[j] = &steps[i];
            balance_.apply(steps[i], +1);
            descend(j + 1, visit);
            balance_.apply(steps[i], -1);
        }
    }

    const KPathSpec& spec_;
    Balance balance_;
    std::map<int, std::vector<Path>> paths_;
    std::map<int, std::vector<std::vector<Step>>> steps_;
    std::vector<const Path*> current_;
    std::vector<const std::vector<Step>*> current_steps_;
};

using PathRefs = std::vector<const Path*>;
using StepRefs = std::vector<const std::vector<Step>*>;

// Joint cumulant from moments on subsets of {0..k-1}, by the recursion
// M(S) = sum_{B containing min S} T(B) M(S \ B), which regroups the sum over
// set partitions of S by the block holding its smallest element.
template <class Moment>
std::int64_t cumulant_from_moments(int k, Moment&& moment) {
    const unsigned full = (1u << k) - 1;
    std::vector<std::int64_t> cumulant(full + 1, 0);
    std::vector<std::int64_t> moments(full + 1, 0);
    moments[0] = 1;
    for (unsigned S = 1; S <= full; ++S) moments[S] = moment(S);
    for (unsigned S = 1; S <= full; ++S) {
        const unsigned low = S & (~S + 1);
        const unsigned rest = S ^ low;
        std::int64_t value = moments[S];
        // B = low | sub for every proper sub of rest; B = S itself is excluded.
        for (unsigned sub = rest;; sub = (sub - 1) & rest) {
            const unsigned B = low | sub;
            if (B != S) value -= cumulant[B] * moments[S ^ B];
            if (sub == 0) break;
        }
        cumulant[S] = value;
    }
    return cumulant[full];
}

DiagramClass classify_refs(const PathRefs& paths, SymmetryClass symmetry) {
    std::map<Edge, int> traversals;
    std::map<Vertex, int> starts;
    for (const Path* p : paths) {
        if (p->size() < 2 || p->front() != p->back()) {
            throw StructuralError("classify_diagram: path is not closed");
        }
        ++starts[p->front()];
        for (std::size_t i = 0; i + 1 < p->size(); ++i) ++traversals[undirected((*p)[i], (*p)[i + 1])];
    }

    std::map<Vertex, int> weighted_degree;
    std::map<Vertex, std::vector<std::pair<Vertex, int>>> incident;
    long total_multiplicity = 0;
    for (const auto& [edge, count] : traversals) {
        if (count % 2 != 0) {
            throw StructuralError(fmt::format("edge ({}, {}) traversed an odd number ({}) of times",
                                              edge.first, edge.second, count));
        }
        const int mult = count / 2;
        weighted_degree[edge.first] += mult;
        weighted_degree[edge.second] += mult;
        incident[edge.first].emplace_back(edge.second, mult);
        incident[edge.second].emplace_back(edge.first, mult);
        total_multiplicity += mult;
    }

    const int k = static_cast<int>(paths.size());
    long vertices = 0;
    long edges = 0;
    long suppressed = 0;
    auto start_count = [&](Vertex v) {
        const auto it = starts.find(v);
        return it == starts.end() ? 0 : it->second;
    };
    auto is_suppressed = [&](Vertex v) { return start_count(v) == 0 && weighted_degree[v] == 2; };
    // Degree of v in the diagram before splitting, counting stems.
    auto diagram_degree = [&](Vertex v) { return weighted_degree[v] + start_count(v); };

    for (const auto& [v, degree] : weighted_degree) {
        const int m = start_count(v);
        if (m == 0) {
            if (degree == 2) {
                ++suppressed;
            } else if (degree >= 3) {
                vertices += degree - 2;
                edges += degree - 3;
            } else {
                throw StructuralError(fmt::format("vertex {} is a dead end of the image graph", v));
            }
        } else if (degree == 1 && m == 1) {
            vertices += 1;
        } else {
            const int D = degree + m;
            vertices += m + (D - 2);
            edges += m + (D - 3);
        }
    }
    edges += total_multiplicity - suppressed;

    if (vertices % 2 != 0) {
        throw StructuralError(fmt::format("diagram has an odd number ({}) of vertices", vertices));
    }
    const int s = static_cast<int>(vertices / 2);
    if (edges != 3L * s - k || s < k) {
        throw StructuralError(fmt::format("diagram with {} vertices, {} edges, k = {} violates "
                                          "edge_count = 3s - k, s >= k",
                                          vertices, edges, k));
    }

    if (symmetry == SymmetryClass::phases) {
        // A chain leaving a degree-3 vertex and returning to it is a loop.
        for (const auto& [x, degree] : weighted_degree) {
            if (is_suppressed(x) || diagram_degree(x) != 3) continue;
            for (const auto& [first, mult] : incident[x]) {
                if (mult != 1) continue;
                Vertex previous = x;
                Vertex current = first;
                while (is_suppressed(current)) {
                    const auto& around = incident[current];
                    const Vertex next = around[0].first == previous ? around[1].first : around[0].first;
                    previous = current;
                    current = next;
                }
                if (current == x) {
                    throw StructuralError(fmt::format("phase diagram has a loop at vertex {}", x));
                }
            }
        }
    }
    return {s, k, static_cast<int>(vertices), static_cast<int>(edges)};
}

} // namespace

std::vector<Path> closed_nb_paths(const BandParams& params, int n, const OracleBudget& budget) {
    params.check();
    if (n < 1) throw DomainError(fmt::format("path length must be >= 1, got {}", n));
    const Vertex N = params.n_sites;
    const Vertex W = params.half_bandwidth;
    const double deg = static_cast<double>(params.degree());
    const double nodes = static_cast<double>(N) * deg * std::pow(std::max(deg - 1.0, 1.0), n - 1);
    if (nodes > budget.max_search_nodes) {
        throw ResourceError(fmt::format("closed path search of length {} on N = {}, W = {} "
                                        "exceeds {} nodes",
                                        n, N, W, budget.max_search_nodes));
    }

    std::vector<std::vector<Vertex>> neighbors(static_cast<std::size_t>(N));
    const auto offsets = neighbor_offsets(N, W);
    for (Vertex u = 0; u < N; ++u) {
        for (Vertex d : offsets) neighbors[u].push_back(wrap(u + d, N));
        std::sort(neighbors[u].begin(), neighbors[u].end());
    }

    std::vector<Path> out;
    Path path(static_cast<std::size_t>(n) + 1);
    std::function<void(int)> extend = [&](int i) {
        const Vertex cur = path[i];
        if (i == n) {
            if (cur == path[0]) out.push_back(path);
            return;
        }
        // Prune branches that cannot return in the remaining steps.
        if (circular_distance(cur, path[0], N) > W * (n - i)) return;
        for (Vertex next : neighbors[cur]) {
            if (i >= 1 && next == path[i - 1]) continue;
            path[i + 1] = next;
            extend(i + 1);
        }
    };
    for (Vertex u = 0; u < N; ++u) {
        path[0] = u;
        extend(0);
    }
    return out;
}

bool satisfies_condition_d(const KPath& kpath, Vertex n_sites, SymmetryClass symmetry) {
    std::map<Edge, int> flow;
    for (const auto& p : kpath) {
        for (std::size_t i = 0; i + 1 < p.size(); ++i) {
            const Vertex a = wrap(p[i], n_sites);
            const Vertex b = wrap(p[i + 1], n_sites);
            int& f = flow[undirected(a, b)];
            if (symmetry == SymmetryClass::signs) {
                ++f;
            } else {
                f += a < b ? 1 : -1;
            }
        }
    }
    return std::all_of(flow.begin(), flow.end(), [&](const auto& item) {
        return symmetry == SymmetryClass::signs ? item.second % 2 == 0 : item.second == 0;
    });
}

void for_each_valid_kpath(const BandParams& params, const KPathSpec& spec,
                          const std::function<void(const KPath&)>& visit,
                          const OracleBudget& budget) {
    TupleEnumerator enumerator(params, spec, budget);
    KPath kpath(spec.lengths.size());
    enumerator.run([&](const PathRefs& paths, const StepRefs&) {
        for (std::size_t j = 0; j < paths.size(); ++j) kpath[j] = *paths[j];
        visit(kpath);
    });
}

std::int64_t joint_moment_paths(const BandParams& params, const KPathSpec& spec,
                                const OracleBudget& budget) {
    std::int64_t count = 0;
    TupleEnumerator(params, spec, budget).run([&](const PathRefs&, const StepRefs&) { ++count; });
    return count;
}

std::int64_t cumulant_T(const BandParams& params, const KPathSpec& spec, const OracleBudget& budget) {
    check_budget(params, spec, budget);
    const int k = spec.k();
    if (k > 16) throw ResourceError("cumulant over more than 16 paths");
    std::map<std::vector<int>, std::int64_t> cache;
    return cumulant_from_moments(k, [&](unsigned S) {
        std::vector<int> sub;
        for (int j = 0; j < k; ++j) {
            if ((S >> j) & 1u) sub.push_back(spec.lengths[j]);
        }
        const auto it = cache.find(sub);
        if (it != cache.end()) return it->second;
        const std::int64_t m = joint_moment_paths(params, KPathSpec{sub, spec.symmetry}, budget);
        cache.emplace(sub, m);
        return m;
    });
}

std::int64_t kpath_cumulant_sum(const BandParams& params, const KPathSpec& spec,
                                const OracleBudget& budget) {
    const int k = spec.k();
    if (k > 16) throw ResourceError("cumulant over more than 16 paths");
    std::int64_t total = 0;
    TupleEnumerator(params, spec, budget).run([&](const PathRefs&, const StepRefs& steps) {
        // E of the product of the monomials in a subset is 1 iff the subset is balanced.
        total += cumulant_from_moments(k, [&](unsigned S) {
            Balance balance(params.n_sites, spec.symmetry);
            for (int j = 0; j < k; ++j) {
                if ((S >> j) & 1u) balance.apply(*steps[j], +1);
            }
            return std::int64_t{balance.balanced() ? 1 : 0};
        });
    });
    return total;
}

std::int64_t connected_kpath_count(const BandParams& params, const KPathSpec& spec,
                                   const OracleBudget& budget) {
    const auto k = static_cast<std::size_t>(spec.k());
    std::int64_t count = 0;
    TupleEnumerator(params, spec, budget).run([&](const PathRefs&, const StepRefs& steps) {
        std::vector<std::size_t> parent(k);
        std::iota(parent.begin(), parent.end(), 0);
        auto find = [&](std::size_t x) {
            while (parent[x] != x) x = parent[x] = parent[parent[x]];
            return x;
        };
        std::map<std::size_t, std::size_t> owner;
        for (std::size_t j = 0; j < k; ++j) {
            for (const auto& s : *steps[j]) {
                const auto [it, inserted] = owner.emplace(s.key, j);
                if (!inserted) parent[find(j)] = find(it->second);
            }
        }
        std::size_t roots = 0;
        for (std::size_t j = 0; j < k; ++j) roots += find(j) == j ? 1 : 0;
        if (roots == 1) ++count;
    });
    return count;
}

Complex hn_entry_via_paths(const BandMatrix& H, Vertex u, Vertex v, int n, double path_budget) {
    const auto& params = H.params();
    params.check();
    const Vertex N = params.n_sites;
    if (u < 0 || u >= N || v < 0 || v >= N) {
        throw DomainError(fmt::format("vertices ({}, {}) outside [0, {})", u, v, N));
    }
    if (n < 0) throw DomainError(fmt::format("path length must be >= 0, got {}", n));
    if (n == 0) return u == v ? 1.0 : 0.0;
    const double deg = static_cast<double>(params.degree());
    if (deg * std::pow(std::max(deg - 1.0, 1.0), n - 1) > path_budget) {
        throw ResourceError(fmt::format("path sum of length {} exceeds the budget of {} paths", n,
                                        path_budget));
    }

    const Eigen::MatrixXcd dense = H.dense();
    const auto offsets = neighbor_offsets(N, params.half_bandwidth);
    Complex total{};
    std::function<void(Vertex, Vertex, int, Complex)> extend = [&](Vertex previous, Vertex cur,
                                                                   int step, Complex weight) {
        if (step == n) {
            if (cur == v) total += weight;
            return;
        }
        for (Vertex d : offsets) {
            const Vertex next = wrap(cur + d, N);
            if (step >= 1 && next == previous) continue;
            extend(cur, next, step + 1, weight * dense(cur, next));
        }
    };
    extend(-1, u, 0, 1.0);
    return total;
}

DiagramClass classify_diagram(const KPath& kpath, Vertex n_sites, SymmetryClass symmetry) {
    if (kpath.empty()) throw DomainError("classify_diagram needs k >= 1 paths");
    PathRefs refs;
    for (const auto& p : kpath) refs.push_back(&p);
    (void)n_sites;
    return classify_refs(refs, symmetry);
}

std::map<int, std::int64_t> diagram_census(const BandParams& params, const KPathSpec& spec,
                                           const OracleBudget& budget) {
    std::map<int, std::int64_t> census;
    TupleEnumerator(params, spec, budget).run([&](const PathRefs& paths, const StepRefs&) {
        ++census[classify_refs(paths, spec.symmetry).s];
    });
    return census;
}

namespace {

std::int64_t integral_trace(double t) {
    const double r = std::round(t);
    if (std::abs(t - r) > 1e-6) throw NumericError(fmt::format("trace {} is not an integer", t));
    return static_cast<std::int64_t>(r);
}

void check_lengths(const std::vector<int>& lengths) {
    if (lengths.empty()) throw DomainError("need at least one length");
    for (int n : lengths) {
        if (n < 1) throw DomainError("path lengths must be positive");
    }
}

} // namespace

std::int64_t exhaustive_joint_moment(const BandParams& params, const std::vector<int>& lengths) {
    check_lengths(lengths);
    const SignAssignments all(params);
    const int n_max = *std::max_element(lengths.begin(), lengths.end());
    __int128 sum = 0;
    for (std::uint64_t i = 0; i < all.size(); ++i) {
        const auto traces = nb_moment_traces(all.at(i), n_max);
        __int128 product = 1;
        for (int n : lengths) product *= integral_trace(traces[n]);
        sum += product;
    }
    const auto count = static_cast<__int128>(all.size());
    if (sum % count != 0) {
        throw NumericError("exhaustive sum is not divisible by the number of sign matrices");
    }
    return static_cast<std::int64_t>(sum / count);
}

MonteCarloMoment monte_carlo_joint_moment(const BandParams& params, const std::vector<int>& lengths,
                                          std::int64_t samples, std::uint64_t master_seed) {
    check_lengths(lengths);
    if (samples < 2) throw DomainError("Monte Carlo needs at least 2 samples");
    const int n_max = *std::max_element(lengths.begin(), lengths.end());
    double mean = 0.0;
    double m2 = 0.0;
    for (std::int64_t r = 0; r < samples; ++r) {
        const auto H = sample_band_matrix(params, {master_seed, static_cast<std::uint64_t>(r)});
        const auto traces = nb_moment_traces(H, n_max);
        double product = 1.0;
        for (int n : lengths) product *= traces[n];
        const double delta = product - mean;
        mean += delta / static_cast<double>(r + 1);
        m2 += delta * (product - mean);
    }
    const double variance = m2 / static_cast<double>(samples - 1);
    return {mean, std::sqrt(variance / static_cast<double>(samples)), samples};
}

} // namespace bandedge
