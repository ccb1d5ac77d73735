#include "govrek/grid_env.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <string>

namespace govrek {

namespace {

std::int64_t sum_dims(const std::vector<std::int64_t>& dims) {
    return std::accumulate(dims.begin(), dims.end(), std::int64_t{0});
}

} // namespace

std::int64_t GridEnvConfig::default_fuel() const {
    return static_cast<std::int64_t>(std::ceil(0.75 * static_cast<double>(sum_dims(dims))));
}

std::int64_t GridEnvConfig::default_max_episode_len() const { return 10 * sum_dims(dims); }

GridEnvConfig GridEnvConfig::resolved() const {
    GridEnvConfig c = *this;
    if (c.dims.size() != 2 && c.dims.size() != 3)
        throw ConfigError("grid env needs 2 or 3 dimensions");
    for (std::int64_t d : c.dims)
        if (d < 3) throw ConfigError("grid extents must be >= 3 for the delivery task");
    if (c.n_agents != 2) throw ConfigError("the delivery task is defined for exactly 2 agents");
    if (c.agent2_delay < 0) throw ConfigError("agent2_delay must be >= 0");
    if (c.n_blockers < 0) throw ConfigError("n_blockers must be >= 0");
    if (!(c.goal_reward > 0.0)) throw ConfigError("goal_reward must be positive");

    if (c.fuel.empty()) c.fuel.assign(static_cast<std::size_t>(c.n_agents), c.default_fuel());
    if (static_cast<int>(c.fuel.size()) != c.n_agents)
        throw ConfigError("fuel must list one budget per agent");
    for (std::int64_t f : c.fuel)
        if (f < 1) throw ConfigError("fuel must be >= 1");
    if (c.max_episode_len == 0) c.max_episode_len = c.default_max_episode_len();
    if (c.max_episode_len < 1) throw ConfigError("max_episode_len must be >= 1");

    const DomainDescriptor domain = DomainDescriptor::grid(c.dims);
    const int nd = c.ndim();

    // Canonical fixed layout: package at the low corner, goal at the high
    // corner, agent 1 on the first axis as close to the package as the fuel
    // budget allows without enabling a solo delivery, agent 2 near the goal.
    if (c.package_start.empty()) c.package_start.assign(static_cast<std::size_t>(nd), 0);
    if (c.goal.empty()) {
        c.goal.resize(static_cast<std::size_t>(nd));
        for (int i = 0; i < nd; ++i) c.goal[static_cast<std::size_t>(i)] = c.dims[static_cast<std::size_t>(i)] - 1;
    }
    if (c.agent_starts.empty()) {
        std::int64_t pkg_to_goal = 0;
        for (int i = 0; i < nd; ++i) pkg_to_goal += c.dims[static_cast<std::size_t>(i)] - 1;
        const std::int64_t fuel = c.fuel.empty() ? c.default_fuel() : c.fuel[0];
        std::int64_t r1 = std::max<std::int64_t>(1, fuel - pkg_to_goal + 1);
        r1 = std::min(r1, c.dims[0] - 1);
        std::vector<std::int64_t> a1(static_cast<std::size_t>(nd), 0);
        a1[0] = r1;
        std::vector<std::int64_t> a2 = c.goal;
        a2[0] = c.dims[0] - 2;
        c.agent_starts = {a1, a2};
    }
    if (static_cast<int>(c.agent_starts.size()) != c.n_agents)
        throw ConfigError("agent_starts must list one cell per agent");

    return c;
}

bool monotone_path_exists(const DomainDescriptor& domain, const std::vector<char>& blockers,
                          std::int64_t from, std::int64_t to) {
    const int nd = domain.ndim();
    const Point pf = domain.cell_point(from);
    const Point pt = domain.cell_point(to);
    std::vector<std::int64_t> lo(static_cast<std::size_t>(nd)), span(static_cast<std::size_t>(nd));
    std::vector<int> dir(static_cast<std::size_t>(nd));
    std::int64_t box = 1;
    for (int i = 0; i < nd; ++i) {
        const auto a = static_cast<std::int64_t>(pf[i]);
        const auto b = static_cast<std::int64_t>(pt[i]);
        lo[static_cast<std::size_t>(i)] = std::min(a, b);
        span[static_cast<std::size_t>(i)] = std::abs(b - a) + 1;
        dir[static_cast<std::size_t>(i)] = b >= a ? 1 : -1;
        box *= span[static_cast<std::size_t>(i)];
    }

    // DP over the bounding box; each cell is reachable if any predecessor
    // along a goal-ward axis is reachable and the cell is not blocked.
    std::vector<char> reach(static_cast<std::size_t>(box), 0);
    auto box_to_cell = [&](std::int64_t bi) {
        std::vector<std::int64_t> coords(static_cast<std::size_t>(nd));
        std::int64_t rest = bi;
        for (int i = nd - 1; i >= 0; --i) {
            const std::int64_t off = rest % span[static_cast<std::size_t>(i)];
            rest /= span[static_cast<std::size_t>(i)];
            const std::int64_t fromc = static_cast<std::int64_t>(pf[i]);
            coords[static_cast<std::size_t>(i)] = fromc + dir[static_cast<std::size_t>(i)] * off;
        }
        return domain.cell_index(coords);
    };

    for (std::int64_t bi = 0; bi < box; ++bi) {
        const std::int64_t cell = box_to_cell(bi);
        if (blockers[static_cast<std::size_t>(cell)]) continue;
        if (bi == 0) {
            reach[0] = 1;
            continue;
        }
        std::int64_t stride = 1;
        bool ok = false;
        for (int i = nd - 1; i >= 0 && !ok; --i) {
            const std::int64_t off = (bi / stride) % span[static_cast<std::size_t>(i)];
            if (off > 0 && reach[static_cast<std::size_t>(bi - stride)]) ok = true;
            stride *= span[static_cast<std::size_t>(i)];
        }
        reach[static_cast<std::size_t>(bi)] = ok ? 1 : 0;
    }
    return reach[static_cast<std::size_t>(box - 1)] != 0;
}

std::vector<std::int64_t> bfs_distances(const DomainDescriptor& domain,
                                        const std::vector<char>& blockers, std::int64_t from) {
    const std::int64_t n = domain.cell_count();
    std::vector<std::int64_t> dist(static_cast<std::size_t>(n), -1);
    if (blockers[static_cast<std::size_t>(from)]) return dist;
    std::deque<std::int64_t> queue{from};
    dist[static_cast<std::size_t>(from)] = 0;
    const int nd = domain.ndim();
    while (!queue.empty()) {
        const std::int64_t cell = queue.front();
        queue.pop_front();
        const Point p = domain.cell_point(cell);
        for (int axis = 0; axis < nd; ++axis) {
            for (int step : {-1, 1}) {
                std::vector<std::int64_t> coords(static_cast<std::size_t>(nd));
                for (int i = 0; i < nd; ++i) coords[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(p[i]);
                coords[static_cast<std::size_t>(axis)] += step;
                if (coords[static_cast<std::size_t>(axis)] < 0 ||
                    coords[static_cast<std::size_t>(axis)] >= domain.dims[static_cast<std::size_t>(axis)])
                    continue;
                const std::int64_t next = domain.cell_index(coords);
                if (blockers[static_cast<std::size_t>(next)] || dist[static_cast<std::size_t>(next)] >= 0)
                    continue;
                dist[static_cast<std::size_t>(next)] = dist[static_cast<std::size_t>(cell)] + 1;
                queue.push_back(next);
            }
        }
    }
    return dist;
}

namespace {

bool adjacent_or_equal(const DomainDescriptor& domain, std::int64_t a, std::int64_t b) {
    if (a == b) return true;
    const Point pa = domain.cell_point(a);
    const Point pb = domain.cell_point(b);
    std::int64_t l1 = 0;
    for (int i = 0; i < domain.ndim(); ++i)
        l1 += std::abs(static_cast<std::int64_t>(pa[i]) - static_cast<std::int64_t>(pb[i]));
    return l1 == 1;
}

} // namespace

bool layout_feasible(const DomainDescriptor& domain, const std::vector<char>& blockers,
                     const GridLayout& layout, const std::vector<std::int64_t>& fuel,
                     std::string* why) {
    auto fail = [&](const char* reason) {
        if (why) *why = reason;
        return false;
    };

    std::vector<std::int64_t> entities = layout.agent_starts;
    entities.push_back(layout.package_start);
    entities.push_back(layout.goal);
    for (std::size_t i = 0; i < entities.size(); ++i) {
        if (blockers[static_cast<std::size_t>(entities[i])]) return fail("entity on blocker");
        for (std::size_t j = i + 1; j < entities.size(); ++j)
            if (entities[i] == entities[j]) return fail("entities not distinct");
    }

    if (!monotone_path_exists(domain, blockers, layout.package_start, layout.goal))
        return fail("no monotone package->goal path");

    const auto d_pkg = bfs_distances(domain, blockers, layout.package_start);
    const auto d_goal = bfs_distances(domain, blockers, layout.goal);
    const auto d_a0 = bfs_distances(domain, blockers, layout.agent_starts[0]);
    const auto d_a1 = bfs_distances(domain, blockers, layout.agent_starts[1]);

    auto reach = [](const std::vector<std::int64_t>& d, std::int64_t cell) {
        return d[static_cast<std::size_t>(cell)] >= 0;
    };
    if (!reach(d_pkg, layout.goal)) return fail("goal unreachable from package");

    // No agent may manage pickup plus delivery on its own fuel budget.
    for (int agent = 0; agent < 2; ++agent) {
        const auto& d_a = agent == 0 ? d_a0 : d_a1;
        if (!reach(d_a, layout.package_start)) continue; // cannot even pick up
        const std::int64_t alone =
            d_a[static_cast<std::size_t>(layout.package_start)] + d_pkg[static_cast<std::size_t>(layout.goal)];
        if (alone <= fuel[static_cast<std::size_t>(agent)]) return fail("an agent can deliver alone");
    }

    // Joint feasibility: a carrier brings the package to some handover cell c1
    // while the partner reaches an adjacent cell c2 and finishes the delivery.
    const std::int64_t n = domain.cell_count();
    for (int carrier = 0; carrier < 2; ++carrier) {
        const auto& d_c = carrier == 0 ? d_a0 : d_a1;
        const auto& d_p = carrier == 0 ? d_a1 : d_a0;
        const std::int64_t f_c = fuel[static_cast<std::size_t>(carrier)];
        const std::int64_t f_p = fuel[static_cast<std::size_t>(1 - carrier)];
        if (!reach(d_c, layout.package_start)) continue;
        const std::int64_t to_pkg = d_c[static_cast<std::size_t>(layout.package_start)];
        for (std::int64_t c1 = 0; c1 < n; ++c1) {
            if (blockers[static_cast<std::size_t>(c1)] || !reach(d_pkg, c1)) continue;
            if (to_pkg + d_pkg[static_cast<std::size_t>(c1)] > f_c) continue;
            const Point p1 = domain.cell_point(c1);
            // c2 ranges over c1 and its neighbours.
            std::vector<std::int64_t> candidates{c1};
            for (int axis = 0; axis < domain.ndim(); ++axis) {
                for (int step : {-1, 1}) {
                    std::vector<std::int64_t> coords(static_cast<std::size_t>(domain.ndim()));
                    for (int i = 0; i < domain.ndim(); ++i)
                        coords[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(p1[i]);
                    coords[static_cast<std::size_t>(axis)] += step;
                    if (coords[static_cast<std::size_t>(axis)] < 0 ||
                        coords[static_cast<std::size_t>(axis)] >= domain.dims[static_cast<std::size_t>(axis)])
                        continue;
                    candidates.push_back(domain.cell_index(coords));
                }
            }
            for (std::int64_t c2 : candidates) {
                if (blockers[static_cast<std::size_t>(c2)]) continue;
                if (!reach(d_p, c2) || !reach(d_goal, c2)) continue;
                if (d_p[static_cast<std::size_t>(c2)] + d_goal[static_cast<std::size_t>(c2)] <= f_p)
                    return true;
            }
        }
    }
    return fail("no cooperative delivery plan fits the fuel budgets");
}

GridEnv::GridEnv(GridEnvConfig config, std::uint64_t seed)
    : config_(config.resolved()), domain_(DomainDescriptor::grid(config_.dims)), rng_(seed), base_seed_(seed) {
    this->seed(seed);
    reset();
}

void GridEnv::seed(std::uint64_t s) {
    base_seed_ = s;
    rng_ = Rng(derive_seed(s, {0x67726964ULL}));
    layout_drawn_ = false;
}

GridLayout GridEnv::sample_layout() {
    const std::int64_t cells = domain_.cell_count();
    const std::int64_t fixed_goal = domain_.cell_index(config_.goal);
    for (int attempt = 0; attempt < 10000; ++attempt) {
        GridLayout candidate;
        candidate.goal = fixed_goal;
        std::vector<char> taken(static_cast<std::size_t>(cells), 0);
        taken[static_cast<std::size_t>(fixed_goal)] = 1;
        auto draw_free = [&]() {
            std::int64_t cell;
            do {
                cell = static_cast<std::int64_t>(rng_.uniform_int(static_cast<std::uint64_t>(cells)));
            } while (taken[static_cast<std::size_t>(cell)]);
            taken[static_cast<std::size_t>(cell)] = 1;
            return cell;
        };
        candidate.package_start = draw_free();
        candidate.agent_starts = {draw_free(), draw_free()};
        for (int b = 0; b < config_.n_blockers; ++b) candidate.blockers.push_back(draw_free());

        std::vector<char> blockers(static_cast<std::size_t>(cells), 0);
        for (std::int64_t b : candidate.blockers) blockers[static_cast<std::size_t>(b)] = 1;
        if (layout_feasible(domain_, blockers, candidate, config_.fuel)) return candidate;
    }
    throw LayoutInfeasible("no feasible layout found in 10000 attempts");
}

void GridEnv::apply_layout(const GridLayout& layout) {
    layout_ = layout;
    blocker_mask_.assign(static_cast<std::size_t>(domain_.cell_count()), 0);
    for (std::int64_t b : layout_.blockers) blocker_mask_[static_cast<std::size_t>(b)] = 1;
    state_ = GridEnvState{};
    state_.positions = layout_.agent_starts;
    state_.fuel = config_.fuel;
    state_.package_cell = layout_.package_start;
    state_.holder = -1;
    pickup_seen_ = false;
}

void GridEnv::reset() {
    switch (config_.randomization) {
        case Randomization::Fixed: {
            GridLayout fixed;
            fixed.package_start = domain_.cell_index(config_.package_start);
            fixed.goal = domain_.cell_index(config_.goal);
            for (const auto& s : config_.agent_starts) fixed.agent_starts.push_back(domain_.cell_index(s));
            if (config_.n_blockers > 0) {
                // Fixed mode draws blockers once from the layout seed so the
                // layout is identical across resets and runs with equal seeds.
                if (!layout_drawn_) {
                    Rng blocker_rng(derive_seed(base_seed_, {0x626c6bULL}));
                    const std::int64_t cells = domain_.cell_count();
                    for (int attempt = 0; attempt < 10000; ++attempt) {
                        GridLayout candidate = fixed;
                        std::vector<char> taken(static_cast<std::size_t>(cells), 0);
                        taken[static_cast<std::size_t>(candidate.goal)] = 1;
                        taken[static_cast<std::size_t>(candidate.package_start)] = 1;
                        for (std::int64_t a : candidate.agent_starts) taken[static_cast<std::size_t>(a)] = 1;
                        candidate.blockers.clear();
                        bool clash = false;
                        for (int b = 0; b < config_.n_blockers && !clash; ++b) {
                            std::int64_t cell;
                            int guard = 0;
                            do {
                                cell = static_cast<std::int64_t>(
                                    blocker_rng.uniform_int(static_cast<std::uint64_t>(cells)));
                                if (++guard > 1000) { clash = true; break; }
                            } while (taken[static_cast<std::size_t>(cell)]);
                            if (!clash) {
                                taken[static_cast<std::size_t>(cell)] = 1;
                                candidate.blockers.push_back(cell);
                            }
                        }
                        if (clash) continue;
                        std::vector<char> blockers(static_cast<std::size_t>(cells), 0);
                        for (std::int64_t b : candidate.blockers) blockers[static_cast<std::size_t>(b)] = 1;
                        if (layout_feasible(domain_, blockers, candidate, config_.fuel)) {
                            fixed = candidate;
                            layout_drawn_ = true;
                            break;
                        }
                    }
                    if (!layout_drawn_) throw LayoutInfeasible("no feasible fixed blocker placement");
                    apply_layout(fixed);
                    return;
                }
                apply_layout(layout_);
                return;
            }
            if (!layout_drawn_) {
                std::string why;
                std::vector<char> blockers(static_cast<std::size_t>(domain_.cell_count()), 0);
                if (!layout_feasible(domain_, blockers, fixed, config_.fuel, &why))
                    throw LayoutInfeasible("fixed layout invalid: " + why);
                layout_drawn_ = true;
            }
            apply_layout(fixed);
            return;
        }
        case Randomization::RandomInit:
            if (!layout_drawn_) {
                apply_layout(sample_layout());
                layout_drawn_ = true;
            } else {
                apply_layout(layout_);
            }
            return;
        case Randomization::RandomPerEpisode:
            apply_layout(sample_layout());
            return;
    }
}

std::vector<std::int64_t> GridEnv::cell_coords(std::int64_t cell) const {
    const Point p = domain_.cell_point(cell);
    std::vector<std::int64_t> coords(static_cast<std::size_t>(domain_.ndim()));
    for (int i = 0; i < domain_.ndim(); ++i) coords[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(p[i]);
    return coords;
}

std::int64_t GridEnv::manhattan(std::int64_t a, std::int64_t b) const {
    const auto ca = cell_coords(a);
    const auto cb = cell_coords(b);
    std::int64_t d = 0;
    for (std::size_t i = 0; i < ca.size(); ++i) d += std::abs(ca[i] - cb[i]);
    return d;
}

std::int64_t GridEnv::package_goal_distance() const {
    const std::int64_t pkg =
        state_.holder >= 0 ? state_.positions[static_cast<std::size_t>(state_.holder)] : state_.package_cell;
    return manhattan(pkg, layout_.goal);
}

StepResult GridEnv::step(const std::vector<int>& actions) {
    if (state_.done) throw EpisodeFinished("step() on a finished episode");
    if (static_cast<int>(actions.size()) != config_.n_agents)
        throw InvalidInput("one action per agent required");
    for (int a : actions)
        if (a < 0 || a >= n_actions()) throw InvalidInput("action out of range");

    StepResult result;
    result.rewards.assign(static_cast<std::size_t>(config_.n_agents), 0.0);
    result.info.package_goal_dist_before = static_cast<int>(package_goal_distance());

    const int stay = stay_action();
    const int handover = handover_action();

    std::vector<int> effective = actions;
    if (state_.step_count < config_.agent2_delay && config_.n_agents > 1) effective[1] = stay;

    // Movement and pickup, agents in index order.
    for (int agent = 0; agent < config_.n_agents; ++agent) {
        int action = effective[static_cast<std::size_t>(agent)];
        if (action == stay || action == handover) continue;
        if (state_.fuel[static_cast<std::size_t>(agent)] <= 0) continue; // out of fuel: forced stay
        const int axis = action / 2;
        const int delta = (action % 2 == 0) ? -1 : 1;
        auto coords = cell_coords(state_.positions[static_cast<std::size_t>(agent)]);
        coords[static_cast<std::size_t>(axis)] += delta;
        if (coords[static_cast<std::size_t>(axis)] < 0 ||
            coords[static_cast<std::size_t>(axis)] >= config_.dims[static_cast<std::size_t>(axis)])
            continue; // off-grid: forced stay
        const std::int64_t target = domain_.cell_index(coords);
        if (blocker_mask_[static_cast<std::size_t>(target)]) continue; // blocked: forced stay
        state_.positions[static_cast<std::size_t>(agent)] = target;
        state_.fuel[static_cast<std::size_t>(agent)] -= 1;
        if (state_.holder < 0 && target == state_.package_cell) {
            state_.holder = agent;
            state_.package_cell = -1;
            result.info.picked_up_by = agent;
            result.info.first_pickup = !pickup_seen_;
            pickup_seen_ = true;
        }
    }

    // Handover: the carrier passes the package to a co-located or adjacent partner.
    for (int agent = 0; agent < config_.n_agents; ++agent) {
        if (effective[static_cast<std::size_t>(agent)] != handover) continue;
        if (state_.holder != agent) continue;
        const int other = 1 - agent;
        if (adjacent_or_equal(domain_, state_.positions[static_cast<std::size_t>(agent)],
                              state_.positions[static_cast<std::size_t>(other)])) {
            state_.holder = other;
            result.info.handover_from = agent;
            result.info.handover_to = other;
        }
    }

    // Delivery.
    if (state_.holder >= 0 &&
        state_.positions[static_cast<std::size_t>(state_.holder)] == layout_.goal) {
        const double share = config_.goal_reward / static_cast<double>(config_.n_agents);
        for (double& r : result.rewards) r = share;
        result.info.delivered = true;
        state_.done = true;
    }

    state_.step_count += 1;
    if (!state_.done && state_.step_count >= config_.max_episode_len) {
        state_.done = true;
        result.info.timeout = true;
    }

    result.info.package_goal_dist_after = static_cast<int>(package_goal_distance());
    result.done = state_.done;
    result.base_rewards = result.rewards;
    return result;
}

std::uint64_t GridEnv::state_id() const {
    const std::uint64_t cells = static_cast<std::uint64_t>(domain_.cell_count());
    const std::uint64_t holder_states = cells + static_cast<std::uint64_t>(config_.n_agents);
    const std::uint64_t pkg = state_.holder >= 0
                                  ? cells + static_cast<std::uint64_t>(state_.holder)
                                  : static_cast<std::uint64_t>(state_.package_cell);
    std::uint64_t id = 0;
    for (int agent = 0; agent < config_.n_agents; ++agent)
        id = id * cells + static_cast<std::uint64_t>(state_.positions[static_cast<std::size_t>(agent)]);
    id = id * holder_states + pkg;
    for (int agent = 0; agent < config_.n_agents; ++agent) {
        const std::uint64_t span = static_cast<std::uint64_t>(config_.fuel[static_cast<std::size_t>(agent)]) + 1;
        id = id * span + static_cast<std::uint64_t>(state_.fuel[static_cast<std::size_t>(agent)]);
    }
    return id;
}

std::uint64_t GridEnv::state_space_size() const {
    const std::uint64_t cells = static_cast<std::uint64_t>(domain_.cell_count());
    std::uint64_t size = 1;
    for (int agent = 0; agent < config_.n_agents; ++agent) size *= cells;
    size *= cells + static_cast<std::uint64_t>(config_.n_agents);
    for (int agent = 0; agent < config_.n_agents; ++agent)
        size *= static_cast<std::uint64_t>(config_.fuel[static_cast<std::size_t>(agent)]) + 1;
    return size;
}

std::uint64_t GridEnv::obs_id(int agent) const {
    const std::uint64_t cells = static_cast<std::uint64_t>(domain_.cell_count());
    // Package from this agent's perspective: grounded cell, held by me, held by other.
    std::uint64_t pkg;
    if (state_.holder < 0)
        pkg = static_cast<std::uint64_t>(state_.package_cell);
    else
        pkg = cells + (state_.holder == agent ? 0 : 1);
    const std::uint64_t fuel_span = static_cast<std::uint64_t>(config_.fuel[static_cast<std::size_t>(agent)]) + 1;
    std::uint64_t id = static_cast<std::uint64_t>(state_.positions[static_cast<std::size_t>(agent)]);
    id = id * (cells + 2) + pkg;
    id = id * fuel_span + static_cast<std::uint64_t>(state_.fuel[static_cast<std::size_t>(agent)]);
    return id;
}

std::uint64_t GridEnv::obs_space_size() const {
    const std::uint64_t cells = static_cast<std::uint64_t>(domain_.cell_count());
    std::uint64_t max_fuel = 0;
    for (std::int64_t f : config_.fuel)
        max_fuel = std::max(max_fuel, static_cast<std::uint64_t>(f));
    return cells * (cells + 2) * (max_fuel + 1);
}

AnchorContext GridEnv::anchor_context() const {
    AnchorContext ctx;
    for (std::int64_t start : layout_.agent_starts) {
        const Point p = domain_.cell_point(start);
        ctx.agent_starts.push_back(p);
    }
    ctx.goal = domain_.cell_point(layout_.goal);
    return ctx;
}

std::unique_ptr<MultiAgentEnv> GridEnv::clone() const {
    return std::make_unique<GridEnv>(*this);
}

} // namespace govrek
