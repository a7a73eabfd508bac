#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "bmo/types.hpp"
#include "bmo/upgrade.hpp"

namespace bmo::gen {

/// splitmix64. Update rule, for reproducing the stream elsewhere:
///
///     state += 0x9E3779B97F4A7C15
///     z = state
///     z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///     z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///     output = z ^ (z >> 31)
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform on [0, n), unbiased via rejection.
    std::uint64_t below(std::uint64_t n) {
        std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            std::uint64_t r = next();
            if (r >= threshold) return r % n;
        }
    }

    /// Uniform on [0, 1) with 53 random bits.
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

struct GenConfig {
    int num_packages = 100;
    int base_installed = 25;   // the pre-existing installation
    int extra_installed = 10;  // installed outside the base (the x of i<x>u<y>)
    int request_size = 5;      // upgrade targets drawn from the base (the y)
    double deps_per_package = 2.0;  // mean dependency disjunctions per package
    int disjunction_width = 3;      // max alternatives per disjunction
    double conflict_density = 0.02;  // probability per package pair
    std::uint64_t seed = 1;

    /// Defaults proportional to the universe size: a quarter of the
    /// packages form the base installation, a twentieth are extra.
    static GenConfig scaled(int num_packages, std::uint64_t seed = 1) {
        GenConfig cfg;
        cfg.num_packages = num_packages;
        cfg.base_installed = num_packages / 4;
        cfg.extra_installed = num_packages / 20;
        cfg.request_size = std::min(cfg.base_installed, std::max(1, num_packages / 50));
        cfg.seed = seed;
        return cfg;
    }
};

/// Deterministic random universe. Dependencies point at strictly
/// lower-indexed packages, so the dependency graph is acyclic; conflicts
/// are sampled over pairs with no direct dependency edge, so together
/// with the encoder's all-negative conflict clauses the hard part stays
/// satisfiable. The installed set is base plus extra samples and is
/// kept internally conflict-free, mirroring a consistent installation;
/// the request samples from the base only.
inline pkg::PackageUniverse generate(const GenConfig& cfg) {
    const int n = cfg.num_packages;
    if (n < 0 || cfg.base_installed < 0 || cfg.extra_installed < 0 || cfg.request_size < 0)
        throw Error("generator counts must be nonnegative");
    if (cfg.base_installed + cfg.extra_installed > n)
        throw Error("installed counts exceed the number of packages");
    if (cfg.request_size > cfg.base_installed)
        throw Error("request size exceeds the installed base");
    if (cfg.disjunction_width < 1) throw Error("disjunction width must be at least 1");
    if (cfg.deps_per_package < 0) throw Error("dependency mean must be nonnegative");
    if (cfg.conflict_density < 0 || cfg.conflict_density > 1)
        throw Error("conflict density must lie in [0, 1]");

    SplitMix64 rng(cfg.seed);

    int digits = 1;
    for (int v = n; v >= 10; v /= 10) ++digits;
    auto name_of = [&](int i) {
        std::string num = std::to_string(i + 1);
        return "p" + std::string(static_cast<std::size_t>(digits) - num.size(), '0') + num;
    };

    pkg::PackageUniverse u;
    u.packages.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) u.packages.push_back(pkg::Package{name_of(i), {}, {}, false});

    // installed: a partial shuffle picks base then extra; the request
    // resamples from the base slice
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    const int picked = cfg.base_installed + cfg.extra_installed;
    for (int k = 0; k < picked; ++k) {
        int j = k + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - k)));
        std::swap(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(j)]);
    }
    for (int k = 0; k < picked; ++k)
        u.packages[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])].installed = true;

    std::vector<int> base(order.begin(), order.begin() + cfg.base_installed);
    for (int k = 0; k < cfg.request_size; ++k) {
        int j = k + static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.base_installed - k)));
        std::swap(base[static_cast<std::size_t>(k)], base[static_cast<std::size_t>(j)]);
    }
    for (int k = 0; k < cfg.request_size; ++k)
        u.request.push_back(u.packages[static_cast<std::size_t>(base[static_cast<std::size_t>(k)])].name);
    std::sort(u.request.begin(), u.request.end());

    // dependencies: per package, a uniform 0..2*mean count of
    // disjunctions over distinct lower-indexed targets
    std::set<std::pair<int, int>> related;
    const auto count_cap = static_cast<std::uint64_t>(2.0 * cfg.deps_per_package + 0.5);
    for (int i = 1; i < n; ++i) {
        std::uint64_t disjunctions = rng.below(count_cap + 1);
        for (std::uint64_t d = 0; d < disjunctions; ++d) {
            int width = static_cast<int>(1 + rng.below(static_cast<std::uint64_t>(cfg.disjunction_width)));
            width = std::min(width, i);
            std::set<int> targets;
            while (static_cast<int>(targets.size()) < width)
                targets.insert(static_cast<int>(rng.below(static_cast<std::uint64_t>(i))));
            std::vector<std::string> alts;
            for (int t : targets) {
                alts.push_back(u.packages[static_cast<std::size_t>(t)].name);
                related.insert({t, i});
            }
            auto& deps = u.packages[static_cast<std::size_t>(i)].depends;
            if (std::find(deps.begin(), deps.end(), alts) == deps.end())
                deps.push_back(std::move(alts));
        }
    }

    // the base installation is dependency-closed, a consistent old
    // snapshot; extra-installed packages may keep dangling dependencies
    // (the mid-upgrade leftovers that create optimization pressure)
    auto index_of = [](const std::string& name) { return std::stoi(name.substr(1)) - 1; };
    std::set<int> pending(order.begin(), order.begin() + cfg.base_installed);
    while (!pending.empty()) {
        int p = *pending.begin();
        pending.erase(pending.begin());
        for (const auto& disjunction : u.packages[static_cast<std::size_t>(p)].depends) {
            bool satisfied = false;
            for (const std::string& alt : disjunction)
                if (u.packages[static_cast<std::size_t>(index_of(alt))].installed) {
                    satisfied = true;
                    break;
                }
            if (satisfied) continue;
            int t = index_of(disjunction[rng.below(disjunction.size())]);
            u.packages[static_cast<std::size_t>(t)].installed = true;
            pending.insert(t);
        }
    }

    // conflicts: one draw per ordered pair scan, skipping pairs joined
    // by a dependency edge and pairs inside the installed set
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double draw = rng.unit();
            if (draw >= cfg.conflict_density || related.count({i, j})) continue;
            if (u.packages[static_cast<std::size_t>(i)].installed &&
                u.packages[static_cast<std::size_t>(j)].installed)
                continue;
            u.packages[static_cast<std::size_t>(i)].conflicts.push_back(
                u.packages[static_cast<std::size_t>(j)].name);
        }

    return u;
}

}  // namespace bmo::gen
