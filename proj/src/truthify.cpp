#include "alab/truthify.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "alab/losses.hpp"

namespace alab {

void Menu::validate() const {
    if (items < 1) throw std::invalid_argument("Menu: items >= 1");
    if (entries.empty()) throw std::invalid_argument("Menu: missing null entry");
    for (const auto& e : entries) {
        if (static_cast<int>(e.alloc.size()) != items)
            throw std::invalid_argument("Menu: allocation length mismatch");
        if (!(e.price >= 0.0)) throw std::invalid_argument("Menu: negative price");
        for (double a : e.alloc)
            if (!(a >= 0.0 && a <= 1.0)) throw std::invalid_argument("Menu: infeasible allocation");
    }
    for (double a : entries[0].alloc)
        if (a != 0.0) throw std::invalid_argument("Menu: entry 0 must be the null option");
    if (entries[0].price != 0.0) throw std::invalid_argument("Menu: entry 0 must be free");
}

namespace {

constexpr double kDuplicateTol = 1e-9;

bool allocs_match(const std::vector<double>& a, const std::vector<double>& b) {
    for (size_t j = 0; j < a.size(); ++j)
        if (std::abs(a[j] - b[j]) > kDuplicateTol) return false;
    return true;
}

}  // namespace

Menu extract_menu(const Mechanism& mech, const ProductDistribution& dist, int points_per_dim,
                  double t) {
    const AuctionShape shape = mech.shape();
    if (shape.bidders != 1)
        throw std::invalid_argument("extract_menu: single-bidder mechanisms only");
    if (points_per_dim < 1) throw std::invalid_argument("extract_menu: need points_per_dim >= 1");
    const int m = shape.items;
    long long total = 1;
    for (int j = 0; j < m; ++j) {
        total *= points_per_dim;
        if (total > kGridBudget) throw std::runtime_error("extract_menu: grid budget exceeded");
    }

    Menu menu;
    menu.items = m;
    menu.entries.push_back({std::vector<double>(m, 0.0), 0.0});  // null option

    Mat bids(1, m);
    std::vector<int> odo(m, 0);
    for (long long count = 0; count < total; ++count) {
        for (int j = 0; j < m; ++j) {
            const double lo = dist.marginals[j].search_lo(t);
            const double hi = dist.marginals[j].search_hi(t);
            bids(0, j) = points_per_dim == 1
                             ? lo
                             : lo + (hi - lo) * odo[j] / static_cast<double>(points_per_dim - 1);
        }
        const AuctionOutcome out = mech.run(bids);
        MenuEntry entry{std::vector<double>(out.alloc.row(0).begin(), out.alloc.row(0).end()),
                        out.pay[0]};
        bool merged = false;
        for (auto& existing : menu.entries) {
            if (allocs_match(existing.alloc, entry.alloc)) {
                existing.price = std::min(existing.price, entry.price);
                merged = true;
                break;
            }
        }
        if (!merged) menu.entries.push_back(std::move(entry));
        for (int j = m - 1; j >= 0; --j) {
            if (++odo[j] < points_per_dim) break;
            odo[j] = 0;
        }
    }
    menu.validate();
    return menu;
}

Menu discount_menu(const Menu& menu, double eps) {
    if (!(eps >= 0.0 && eps <= 1.0)) throw std::invalid_argument("discount_menu: eps outside [0,1]");
    Menu out = menu;
    for (auto& e : out.entries) e.price *= (1.0 - eps);
    return out;
}

MenuMechanism::MenuMechanism(Menu menu) : menu_(std::move(menu)) { menu_.validate(); }

int MenuMechanism::choose(std::span<const double> values) const {
    // same arithmetic as utility(): dot first, then subtract the price, so
    // menu-choice maximality is exact for every downstream regret estimate
    int best = 0;
    double best_u = dot(menu_.entries[0].alloc, values) - menu_.entries[0].price;
    for (int k = 1; k < static_cast<int>(menu_.entries.size()); ++k) {
        const MenuEntry& e = menu_.entries[k];
        const double u = dot(e.alloc, values) - e.price;
        if (u > best_u || (u == best_u && e.price < menu_.entries[best].price)) {
            best = k;
            best_u = u;
        }
    }
    return best;
}

AuctionOutcome MenuMechanism::run(const ValuationProfile& bids) const {
    if (bids.rows != 1 || bids.cols != menu_.items)
        throw std::invalid_argument("MenuMechanism: bid shape mismatch");
    const int k = choose(bids.row(0));
    AuctionOutcome out;
    out.alloc = Mat(1, menu_.items);
    for (int j = 0; j < menu_.items; ++j) out.alloc(0, j) = menu_.entries[k].alloc[j];
    out.pay.assign(1, menu_.entries[k].price);
    return out;
}

TruthifyResult truthify(const Mechanism& mech, const ProductDistribution& dist, int test_profiles,
                        int grid_points, uint64_t seed) {
    if (mech.shape().bidders != 1)
        throw std::invalid_argument("truthify: single-bidder mechanisms only");
    EstimatorSpec est;
    est.kind = RegretEstimatorKind::grid;
    est.grid_points = grid_points;

    TruthifyResult result;
    result.input_metrics = empirical_metrics(mech, dist, test_profiles, est, seed);
    result.epsilon = epsilon_star(result.input_metrics.rev, result.input_metrics.total_regret);
    result.menu = discount_menu(extract_menu(mech, dist, grid_points), result.epsilon);
    const MenuMechanism out_mech(result.menu);
    result.output_metrics = empirical_metrics(out_mech, dist, test_profiles, est, seed);
    return result;
}

void write_menu_csv(const std::filesystem::path& path, const Menu& menu) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw std::runtime_error("write_menu_csv: cannot open " + path.string());
    for (int j = 0; j < menu.items; ++j) f << "alloc" << j << ",";
    f << "price\n";
    f.precision(17);
    for (const auto& e : menu.entries) {
        for (double a : e.alloc) f << a << ",";
        f << e.price << "\n";
    }
}

Menu read_menu_csv(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("read_menu_csv: cannot open " + path.string());
    std::string line;
    if (!std::getline(f, line)) throw std::runtime_error("read_menu_csv: empty file");
    int items = 0;
    {
        std::stringstream ss(line);
        std::string col;
        while (std::getline(ss, col, ',')) {
            if (col.rfind("alloc", 0) == 0) ++items;
        }
    }
    if (items < 1) throw std::runtime_error("read_menu_csv: no allocation columns");
    Menu menu;
    menu.items = items;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        MenuEntry e;
        for (int j = 0; j < items; ++j) {
            if (!std::getline(ss, cell, ',')) throw std::runtime_error("read_menu_csv: short row");
            e.alloc.push_back(std::stod(cell));
        }
        if (!std::getline(ss, cell, ',')) throw std::runtime_error("read_menu_csv: missing price");
        e.price = std::stod(cell);
        menu.entries.push_back(std::move(e));
    }
    menu.validate();
    return menu;
}

}  // namespace alab
