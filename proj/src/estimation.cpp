#include "rbl/estimation.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <thread>

#include "parallel.hpp"
#include "rbl/errors.hpp"
#include "rbl/rng.hpp"
#include "text.hpp"

namespace rbl {

unsigned default_workers() {
    if (const char* env = std::getenv("RBL_WORKERS")) {
        const long long v = text::to_int(env, "RBL_WORKERS");
        if (v < 0) throw ConfigError("RBL_WORKERS must be >= 0");
        return v == 0 ? 1u : static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

// --- quadrature ------------------------------------------------------------

namespace {

void check_nodes(std::size_t nodes) {
    if (nodes < kMinQuadratureNodes) {
        throw InvalidArgumentError("quadrature needs at least " +
                                   std::to_string(kMinQuadratureNodes) + " nodes");
    }
}

const DeterministicLhv& require_local(const Model& model) {
    const auto* lhv = dynamic_cast<const DeterministicLhv*>(&model);
    if (lhv == nullptr) {
        throw UnsupportedModelError("model '" + std::string(model.name()) +
                                    "' has no hidden-variable functions");
    }
    return *lhv;
}

}  // namespace

double quadrature_e(const Model& model, double a, double b, double a_r, double b_r,
                    std::size_t nodes) {
    check_nodes(nodes);
    const auto& lhv = require_local(model);
    const auto& hidden = lhv.hidden();
    const double h = hidden.width() / static_cast<double>(nodes);
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes; ++i) {
        const double lambda = hidden.lower + (static_cast<double>(i) + 0.5) * h;
        sum += lhv.outcome_a(a, b_r, lambda) * lhv.outcome_b(b, a_r, lambda) *
               hidden.density(lambda);
    }
    return sum * h;
}

ChProbabilities quadrature_ch(const StochasticLhv& model, double a, double b, double a_r,
                              double b_r, std::size_t nodes) {
    check_nodes(nodes);
    const auto& hidden = model.hidden();
    const double h = hidden.width() / static_cast<double>(nodes);
    ChProbabilities out;
    for (std::size_t i = 0; i < nodes; ++i) {
        const double lambda = hidden.lower + (static_cast<double>(i) + 0.5) * h;
        const double w = hidden.density(lambda) * h;
        const double x = model.p1(a, b_r, lambda);
        const double y = model.p2(b, a_r, lambda);
        out.joint_plus += x * y * w;
        out.p1 += x * w;
        out.p2 += y * w;
    }
    return out;
}

double quadrature_mass(const HiddenSpace& hidden, std::size_t nodes) {
    check_nodes(nodes);
    const double h = hidden.width() / static_cast<double>(nodes);
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes; ++i) {
        sum += hidden.density(hidden.lower + (static_cast<double>(i) + 0.5) * h);
    }
    return sum * h;
}

double model_e(const Model& model, double a, double b, double a_r, double b_r,
               std::size_t nodes) {
    if (auto e = model.closed_form_e(a, b, a_r, b_r)) return *e;
    return quadrature_e(model, a, b, a_r, b_r, nodes);
}

ChProbabilities model_ch(const Model& model, double a, double b, double a_r, double b_r,
                         std::size_t nodes) {
    if (auto p = model.closed_form_ch(a, b, a_r, b_r)) return *p;
    return quadrature_ch(LiftedLhv(require_local(model)), a, b, a_r, b_r, nodes);
}

// --- Monte Carlo -----------------------------------------------------------

McEstimate mc_e(const Model& model, double a, double b, double a_r, double b_r,
                std::uint64_t n, std::uint64_t seed, unsigned workers) {
    if (n == 0) throw InvalidArgumentError("Monte Carlo needs at least one draw");
    const std::uint64_t blocks = (n + kTrialBlock - 1) / kTrialBlock;
    std::vector<std::int64_t> partial(blocks, 0);
    detail::for_each_block(blocks, workers, [&](std::size_t block) {
        Rng rng(derive_seed(seed, block));
        const std::uint64_t begin = block * kTrialBlock;
        const std::uint64_t end = std::min(n, begin + kTrialBlock);
        std::int64_t sum = 0;
        for (std::uint64_t i = begin; i < end; ++i) {
            const auto d = model.draw(a, b, a_r, b_r, rng);
            sum += d.a * d.b;
        }
        partial[block] = sum;
    });
    std::int64_t total = 0;
    for (auto s : partial) total += s;
    McEstimate out;
    out.count = n;
    out.estimate = static_cast<double>(total) / static_cast<double>(n);
    out.standard_error =
        std::sqrt(std::max(0.0, 1.0 - out.estimate * out.estimate) / static_cast<double>(n));
    return out;
}

// --- inequality inputs -----------------------------------------------------

namespace {

std::vector<std::array<const SettingLabel*, 4>> chsh_cells(const Octuple& s) {
    return {{&s.a2, &s.b2, &s.a2_r, &s.b2_r},
            {&s.a2, &s.b, &s.a_r, &s.b2_r},
            {&s.a, &s.b2, &s.a2_r, &s.b_r},
            {&s.a, &s.b, &s.a_r, &s.b_r}};
}

}  // namespace

CorrelationInput analytic_chsh_input(const Model& model, const Octuple& s, std::size_t nodes) {
    CorrelationInput in;
    in.source = Source::Analytic;
    for (const auto& c : chsh_cells(s)) {
        const double e = model_e(model, c[0]->angle, c[1]->angle, c[2]->angle, c[3]->angle, nodes);
        in.cells[CellKey(*c[0], *c[1], *c[2], *c[3])] = Estimate{e, 0.0, 0, true};
    }
    return in;
}

ProbabilityInput analytic_ch_input(const Model& model, const Octuple& s, std::size_t nodes) {
    ProbabilityInput in;
    in.source = Source::Analytic;
    const auto cells = chsh_cells(s);
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto& c = cells[i];
        const auto p =
            model_ch(model, c[0]->angle, c[1]->angle, c[2]->angle, c[3]->angle, nodes);
        in.joint[CellKey(*c[0], *c[1], *c[2], *c[3])] = Estimate{p.joint_plus, 0.0, 0, true};
        // Cell 0 carries p1(a'|b'_r), p2(b'|a'_r); cell 3 carries p1(a|b_r), p2(b|a_r).
        if (i == 0 || i == 3) {
            in.p1.try_emplace(c[0]->id, Estimate{p.p1, 0.0, 0, true});
            in.p2.try_emplace(c[1]->id, Estimate{p.p2, 0.0, 0, true});
        }
    }
    return in;
}

CorrelationInput analytic_input(const Model& model, const std::vector<SettingLabel>& station1,
                                const std::vector<SettingLabel>& station2, std::size_t nodes) {
    CorrelationInput in;
    in.source = Source::Analytic;
    for (const auto& a : station1) {
        for (const auto& b : station2) {
            for (const auto& a_r : station1) {
                for (const auto& b_r : station2) {
                    const double e = model_e(model, a.angle, b.angle, a_r.angle, b_r.angle, nodes);
                    in.cells[CellKey(a, b, a_r, b_r)] = Estimate{e, 0.0, 0, true};
                }
            }
        }
    }
    return in;
}

CorrelationInput mc_chsh_input(const Model& model, const Octuple& s, std::uint64_t n,
                               std::uint64_t seed, unsigned workers) {
    CorrelationInput in;
    in.source = Source::MonteCarlo;
    std::uint64_t stream = 0;
    for (const auto& c : chsh_cells(s)) {
        CellKey key(*c[0], *c[1], *c[2], *c[3]);
        ++stream;
        if (in.cells.contains(key)) continue;
        const auto m = mc_e(model, c[0]->angle, c[1]->angle, c[2]->angle, c[3]->angle, n,
                            derive_seed(seed, stream), workers);
        in.cells[std::move(key)] = Estimate{m.estimate, m.standard_error, m.count, true};
    }
    return in;
}

// --- trial log CSV ---------------------------------------------------------

void write_trial_log_csv(std::ostream& out, const TrialLog& log) {
    out << "trial_id,t1,t2,a,b,a_r,b_r,A,B,lambda\n";
    std::string line;
    for (const auto& r : log.records) {
        line.clear();
        line += std::to_string(r.trial_id);
        line += ',';
        line += text::exact(r.t1);
        line += ',';
        line += text::exact(r.t2);
        for (const auto* id : {&log.a(r).id, &log.b(r).id, &log.a_r(r).id, &log.b_r(r).id}) {
            line += ',';
            line += *id;
        }
        line += r.outcome_a > 0 ? ",1" : ",-1";
        line += r.outcome_b > 0 ? ",1," : ",-1,";
        if (r.has_lambda()) line += text::exact(r.lambda);
        line += '\n';
        out << line;
    }
}

TrialLog read_trial_log_csv(std::istream& in, const Palette& station1, const Palette& station2) {
    TrialLog log{station1, station2, {}};
    std::string line;
    if (!std::getline(in, line) || text::trim(line) != "trial_id,t1,t2,a,b,a_r,b_r,A,B,lambda") {
        throw ConfigError("trial log header must be trial_id,t1,t2,a,b,a_r,b_r,A,B,lambda");
    }
    auto index = [](Palette& p, std::string_view id) {
        if (auto i = p.find(id)) return static_cast<std::uint16_t>(*i);
        return static_cast<std::uint16_t>(p.intern(SettingLabel(std::string(id), 0.0)));
    };
    auto sign = [](std::string_view v) -> std::int8_t {
        const auto x = text::to_int(v, "outcome");
        if (x != 1 && x != -1) throw ConfigError("outcome must be +1 or -1");
        return static_cast<std::int8_t>(x);
    };
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (text::trim(line).empty()) continue;
        const auto f = text::split(text::trim(line), ',');
        if (f.size() != 10) {
            throw ConfigError("trial log row " + std::to_string(row) + ": expected 10 columns");
        }
        TrialRecord r;
        r.trial_id = static_cast<std::uint64_t>(text::to_int(f[0], "trial_id"));
        r.t1 = text::to_double(f[1], "t1");
        r.t2 = text::to_double(f[2], "t2");
        r.a = index(log.station1, f[3]);
        r.b = index(log.station2, f[4]);
        r.a_r = index(log.station1, f[5]);
        r.b_r = index(log.station2, f[6]);
        r.outcome_a = sign(f[7]);
        r.outcome_b = sign(f[8]);
        if (!text::trim(f[9]).empty()) r.lambda = text::to_double(f[9], "lambda");
        log.records.push_back(r);
    }
    return log;
}

// --- correlation tables ----------------------------------------------------

namespace {

void finish_cell(TableCell& c, std::uint64_t min_count) {
    c.estimate = static_cast<double>(c.sum_of_products) / static_cast<double>(c.count);
    c.standard_error = std::sqrt(std::max(0.0, 1.0 - c.estimate * c.estimate) /
                                 static_cast<double>(c.count));
    c.sufficient = c.count >= min_count;
}

// Dense index over (a, b, a_r, b_r) label indices.
struct CellIndexer {
    std::size_t n1, n2;
    std::size_t size() const { return n1 * n2 * n1 * n2; }
    std::size_t operator()(const TrialRecord& r) const {
        return ((r.a * n2 + r.b) * n1 + r.a_r) * n2 + r.b_r;
    }
};

Estimate binomial(std::uint64_t hits, std::uint64_t n, std::uint64_t min_count) {
    Estimate e;
    e.count = n;
    e.value = n == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(n);
    e.standard_error = n == 0 ? 0.0 : std::sqrt(e.value * (1.0 - e.value) / static_cast<double>(n));
    e.sufficient = n >= min_count && n > 0;
    return e;
}

}  // namespace

CorrelationTable build_table(const TrialLog& log, std::uint64_t min_count) {
    const CellIndexer idx{log.station1.size(), log.station2.size()};
    std::vector<TableCell> dense(idx.size());
    for (const auto& r : log.records) {
        auto& c = dense[idx(r)];
        c.sum_of_products += r.outcome_a * r.outcome_b;
        ++c.count;
        if (r.outcome_a > 0 && r.outcome_b > 0) ++c.both_plus;
    }
    CorrelationTable table;
    table.min_count = min_count;
    for (std::size_t a = 0; a < idx.n1; ++a) {
        for (std::size_t b = 0; b < idx.n2; ++b) {
            for (std::size_t ar = 0; ar < idx.n1; ++ar) {
                for (std::size_t br = 0; br < idx.n2; ++br) {
                    auto& c = dense[((a * idx.n2 + b) * idx.n1 + ar) * idx.n2 + br];
                    if (c.count == 0) continue;
                    finish_cell(c, min_count);
                    table.cells[CellKey(log.station1[a], log.station2[b], log.station1[ar],
                                        log.station2[br])] = c;
                }
            }
        }
    }
    return table;
}

CorrelationInput CorrelationTable::correlations() const {
    CorrelationInput in;
    in.source = Source::MonteCarlo;
    for (const auto& [key, c] : cells) {
        in.cells[key] = Estimate{c.estimate, c.standard_error, c.count, c.sufficient};
    }
    return in;
}

void write_table_csv(std::ostream& out, const CorrelationTable& table) {
    out << "a,b,a_r,b_r,E,SE,count,sufficient\n";
    for (const auto& [key, c] : table.cells) {
        out << key.a << ',' << key.b << ',' << key.a_r << ',' << key.b_r << ','
            << text::exact(c.estimate) << ',' << text::exact(c.standard_error) << ','
            << c.count << ',' << (c.sufficient ? "true" : "false") << '\n';
    }
}

CorrelationTable read_table_csv(std::istream& in, std::optional<std::uint64_t> min_count) {
    std::string line;
    if (!std::getline(in, line) || text::trim(line) != "a,b,a_r,b_r,E,SE,count,sufficient") {
        throw ConfigError("correlation table header must be a,b,a_r,b_r,E,SE,count,sufficient");
    }
    CorrelationTable table;
    if (min_count) table.min_count = *min_count;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (text::trim(line).empty()) continue;
        const auto f = text::split(text::trim(line), ',');
        const std::string where = "table row " + std::to_string(row);
        if (f.size() != 8) throw ConfigError(where + ": expected 8 columns");
        TableCell c;
        c.estimate = text::to_double(f[4], "E");
        c.standard_error = text::to_double(f[5], "SE");
        c.count = static_cast<std::uint64_t>(text::to_int(f[6], "count"));
        if (std::abs(c.estimate) > 1.0 || c.standard_error < 0.0) {
            throw ConfigError(where + ": E must lie in [-1,1] and SE be >= 0");
        }
        const auto flag = text::trim(f[7]);
        if (flag != "true" && flag != "false") throw ConfigError(where + ": bad sufficient flag");
        c.sufficient = min_count ? c.count >= *min_count : flag == "true";
        c.sum_of_products = std::llround(c.estimate * static_cast<double>(c.count));
        table.cells[CellKey(std::string(text::trim(f[0])), std::string(text::trim(f[1])),
                            std::string(text::trim(f[2])), std::string(text::trim(f[3])))] = c;
    }
    return table;
}

// --- Clauser-Horne ---------------------------------------------------------

ChEstimate estimate_ch_probs(const TrialLog& log, const SettingLabel& a, const SettingLabel& b,
                             const SettingLabel& a_r, const SettingLabel& b_r,
                             std::uint64_t min_count) {
    const auto ia = log.station1.find(a.id), ib = log.station2.find(b.id);
    const auto iar = log.station1.find(a_r.id), ibr = log.station2.find(b_r.id);
    std::uint64_t n = 0, both = 0, na = 0, a_plus = 0, nb = 0, b_plus = 0;
    if (ia && ib && iar && ibr) {
        for (const auto& r : log.records) {
            if (r.a == *ia) {
                ++na;
                a_plus += r.outcome_a > 0;
            }
            if (r.b == *ib) {
                ++nb;
                b_plus += r.outcome_b > 0;
            }
            if (r.a == *ia && r.b == *ib && r.a_r == *iar && r.b_r == *ibr) {
                ++n;
                both += r.outcome_a > 0 && r.outcome_b > 0;
            }
        }
    }
    if (n == 0) throw MissingCellError(CellKey(a, b, a_r, b_r).to_string());
    return ChEstimate{binomial(both, n, min_count), binomial(a_plus, na, min_count),
                      binomial(b_plus, nb, min_count)};
}

ProbabilityInput ch_probabilities(const TrialLog& log, std::uint64_t min_count) {
    ProbabilityInput in;
    in.source = Source::MonteCarlo;
    const auto table = build_table(log, min_count);
    for (const auto& [key, c] : table.cells) {
        in.joint[key] = binomial(c.both_plus, c.count, min_count);
    }
    std::vector<std::uint64_t> n1(log.station1.size()), p1(log.station1.size());
    std::vector<std::uint64_t> n2(log.station2.size()), p2(log.station2.size());
    for (const auto& r : log.records) {
        ++n1[r.a];
        p1[r.a] += r.outcome_a > 0;
        ++n2[r.b];
        p2[r.b] += r.outcome_b > 0;
    }
    for (std::size_t i = 0; i < n1.size(); ++i) {
        if (n1[i] > 0) in.p1[log.station1[i].id] = binomial(p1[i], n1[i], min_count);
    }
    for (std::size_t i = 0; i < n2.size(); ++i) {
        if (n2[i] > 0) in.p2[log.station2[i].id] = binomial(p2[i], n2[i], min_count);
    }
    return in;
}

}  // namespace rbl
