#include "sigsas/io.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace sigsas::io {

namespace {

std::uint64_t fnv1a64_bytes(const unsigned char* data, std::size_t n) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= data[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    static const char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    return f;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open for reading: " + path);
    return f;
}

// shortest decimal that round-trips
std::string fmt_double(double v) {
    for (int prec = 15; prec <= 17; ++prec) {
        std::ostringstream os;
        os << std::setprecision(prec) << v;
        if (std::stod(os.str()) == v) return os.str();
    }
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

}  // namespace

std::string hash_doubles(const std::vector<double>& v) {
    return hex64(fnv1a64_bytes(reinterpret_cast<const unsigned char*>(v.data()),
                               v.size() * sizeof(double)));
}

// ---- kernels ----

void write_kernels(const std::string& path, const VolterraKernelSet& kernels) {
    auto f = open_out(path);
    f << "volterra-kernels v1\n";
    f << "p " << kernels.degree() << "\n";
    f << "l " << kernels.lag() << "\n";
    f << "m_out " << kernels.m_out() << "\n";
    for (const auto& [lags, value] : kernels.entries()) {
        f << "g " << lags.size();
        for (int m : lags) f << ' ' << m;
        for (double c : value) f << ' ' << fmt_double(c);
        f << "\n";
    }
}

VolterraKernelSet read_kernels(const std::string& path) {
    auto f = open_in(path);
    std::string line;
    if (!std::getline(f, line) || line != "volterra-kernels v1")
        throw std::runtime_error(path + ": not a volterra-kernels v1 file");
    int p = -1, l = -1, m_out = -1;
    auto read_header = [&](const char* key, int& dst) {
        std::getline(f, line);
        std::istringstream is(line);
        std::string k;
        if (!(is >> k >> dst) || k != key)
            throw std::runtime_error(path + ": expected header line '" + key + " <int>'");
    };
    read_header("p", p);
    read_header("l", l);
    read_header("m_out", m_out);
    VolterraKernelSet ks(p, l, m_out);
    std::size_t line_no = 4;
    while (std::getline(f, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream is(line);
        std::string tag;
        std::size_t degree = 0;
        if (!(is >> tag >> degree) || tag != "g")
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": expected 'g <degree> <lags...> <coeffs...>'");
        std::vector<int> lags(degree);
        for (auto& m : lags)
            if (!(is >> m))
                throw std::runtime_error(path + ":" + std::to_string(line_no) + ": short lag tuple");
        std::vector<double> value(static_cast<std::size_t>(m_out));
        for (auto& c : value)
            if (!(is >> c))
                throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                         ": short coefficient record");
        ks.set(lags, value);
    }
    return ks;
}

// ---- JL maps ----

void write_jl_map(const std::string& path, const JlMap& map) {
    json j;
    j["format"] = "jl-map";
    j["schema_version"] = schema_version;
    j["N"] = map.cols;
    j["k"] = map.rows;
    j["seed"] = map.seed;
    j["epsilon"] = map.epsilon;
    j["matrix_fnv1a"] = hash_doubles(map.s.data);
    write_json(path, j);
}

JlMap read_jl_map(const std::string& path) {
    const json j = read_json(path);
    if (j.value("format", "") != "jl-map") throw std::runtime_error(path + ": not a jl-map file");
    JlMap map = sample_jl(j.at("N").get<std::size_t>(), j.at("k").get<std::size_t>(),
                          j.at("seed").get<std::uint64_t>(), j.at("epsilon").get<double>());
    const std::string expect = j.value("matrix_fnv1a", "");
    if (!expect.empty() && expect != hash_doubles(map.s.data))
        throw std::runtime_error(path + ": regenerated matrix hash mismatch");
    return map;
}

// ---- reservoirs ----

void write_reservoir(const std::string& path, const RandomSasReservoir& r) {
    json j;
    j["format"] = "random-sas-reservoir";
    j["schema_version"] = schema_version;
    j["k"] = r.k;
    j["p"] = r.p;
    j["l"] = r.l;
    j["M"] = r.M;
    j["I0"] = r.i0;
    j["delta"] = r.delta;
    j["lambda"] = r.lambda;
    j["seed"] = r.seed;
    j["sign"] = r.sign;
    j["construction"] = r.construction == RandomSasReservoir::Construction::direct_law
                            ? "direct_law"
                            : "jl_constructed";
    j["esp_condition_ok"] = r.esp_condition_ok;
    json a_list = json::array();
    for (const auto& a : r.a_mats) a_list.push_back(a.data);
    j["A"] = std::move(a_list);
    j["B"] = r.b.data;
    j["hash"] = reservoir_hash(r);
    write_json(path, j);
}

RandomSasReservoir read_reservoir(const std::string& path) {
    const json j = read_json(path);
    if (j.value("format", "") != "random-sas-reservoir")
        throw std::runtime_error(path + ": not a random-sas-reservoir file");
    RandomSasReservoir r;
    r.k = j.at("k").get<int>();
    r.p = j.at("p").get<int>();
    r.l = j.at("l").get<int>();
    r.M = j.at("M").get<double>();
    r.i0 = j.at("I0").get<std::vector<int>>();
    r.delta = j.at("delta").get<double>();
    r.lambda = j.at("lambda").get<double>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.sign = j.at("sign").get<int>();
    r.construction = j.value("construction", "direct_law") == std::string("jl_constructed")
                         ? RandomSasReservoir::Construction::jl_constructed
                         : RandomSasReservoir::Construction::direct_law;
    r.esp_condition_ok = j.value("esp_condition_ok", true);
    const std::size_t k = static_cast<std::size_t>(r.k);
    const auto& a_list = j.at("A");
    if (a_list.size() != static_cast<std::size_t>(r.p) + 1)
        throw std::runtime_error(path + ": expected p+1 A matrices");
    for (const auto& a : a_list) {
        Matrix m(k, k);
        m.data = a.get<std::vector<double>>();
        if (m.data.size() != k * k) throw std::runtime_error(path + ": A matrix size mismatch");
        r.a_mats.push_back(std::move(m));
    }
    r.b = Matrix(k, static_cast<std::size_t>(r.p) + 1);
    r.b.data = j.at("B").get<std::vector<double>>();
    if (r.b.data.size() != k * (static_cast<std::size_t>(r.p) + 1))
        throw std::runtime_error(path + ": B matrix size mismatch");
    const std::string expect = j.value("hash", "");
    if (!expect.empty() && expect != reservoir_hash(r))
        throw std::runtime_error(path + ": reservoir hash mismatch");
    return r;
}

// ---- readouts ----

void write_readout(const std::string& path, const Readout& r) {
    json j;
    j["format"] = "readout";
    j["schema_version"] = schema_version;
    j["m_out"] = r.w.rows;
    j["dim"] = r.w.cols;
    j["ridge"] = r.ridge;
    j["provenance"] = provenance_name(r.provenance);
    j["W"] = r.w.data;
    write_json(path, j);
}

Readout read_readout(const std::string& path) {
    const json j = read_json(path);
    if (j.value("format", "") != "readout") throw std::runtime_error(path + ": not a readout file");
    Readout r;
    r.w = Matrix(j.at("m_out").get<std::size_t>(), j.at("dim").get<std::size_t>());
    r.w.data = j.at("W").get<std::vector<double>>();
    if (r.w.data.size() != r.w.rows * r.w.cols)
        throw std::runtime_error(path + ": readout matrix size mismatch");
    r.ridge = j.value("ridge", 0.0);
    const std::string prov = j.value("provenance", "least_squares");
    if (prov == "analytic_exact") r.provenance = Readout::Provenance::analytic_exact;
    else if (prov == "analytic_transport") r.provenance = Readout::Provenance::analytic_transport;
    else r.provenance = Readout::Provenance::least_squares;
    return r;
}

// ---- CSV ----

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s, const std::string& path, std::size_t row) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error(path + ": row " + std::to_string(row) + ": not a number: '" + s +
                                 "'");
    }
}

}  // namespace

InputTable read_input_csv(const std::string& path) {
    auto f = open_in(path);
    std::string line;
    if (!std::getline(f, line)) throw std::runtime_error(path + ": empty file, header required");
    const auto header = split_csv_line(line);
    if (header.empty() || header[0] != "z")
        throw std::runtime_error(path + ": header must start with column 'z'");
    for (std::size_t c = 1; c < header.size(); ++c) {
        if (header[c] != "y_" + std::to_string(c))
            throw std::runtime_error(path + ": target columns must be named y_1..y_m in order");
    }
    const std::size_t m = header.size() - 1;
    InputTable table;
    std::vector<double> target_rows;
    std::size_t row = 0;
    while (std::getline(f, line)) {
        ++row;
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw std::runtime_error(path + ": row " + std::to_string(row) + ": expected " +
                                     std::to_string(header.size()) + " columns, got " +
                                     std::to_string(cells.size()));
        table.z.push_back(parse_double(cells[0], path, row));
        for (std::size_t c = 1; c < cells.size(); ++c)
            target_rows.push_back(parse_double(cells[c], path, row));
    }
    if (m > 0) {
        table.targets = Matrix(table.z.size(), m);
        table.targets.data = std::move(target_rows);
    }
    return table;
}

void validate_inputs(const std::vector<double>& z, double m_bound) {
    for (std::size_t t = 0; t < z.size(); ++t) {
        if (!(std::fabs(z[t]) <= m_bound))
            throw std::runtime_error("input row " + std::to_string(t + 1) + ": |z| = " +
                                     std::to_string(std::fabs(z[t])) + " exceeds M = " +
                                     std::to_string(m_bound));
    }
}

void write_series_csv(const std::string& path, const std::vector<std::string>& columns,
                      const Matrix& rows) {
    if (rows.cols != columns.size())
        throw std::invalid_argument("write_series_csv: column count mismatch");
    auto f = open_out(path);
    for (std::size_t c = 0; c < columns.size(); ++c) f << (c ? "," : "") << columns[c];
    f << "\n";
    for (std::size_t r = 0; r < rows.rows; ++r) {
        for (std::size_t c = 0; c < rows.cols; ++c) f << (c ? "," : "") << fmt_double(rows.at(r, c));
        f << "\n";
    }
}

void write_states_csv(const std::string& path, const Matrix& states) {
    std::vector<std::string> cols;
    cols.reserve(states.cols);
    for (std::size_t c = 0; c < states.cols; ++c) cols.push_back("x_" + std::to_string(c + 1));
    write_series_csv(path, cols, states);
}

Matrix read_states_csv(const std::string& path) {
    auto f = open_in(path);
    std::string line;
    if (!std::getline(f, line)) throw std::runtime_error(path + ": empty file, header required");
    const auto header = split_csv_line(line);
    for (std::size_t c = 0; c < header.size(); ++c)
        if (header[c] != "x_" + std::to_string(c + 1))
            throw std::runtime_error(path + ": state columns must be named x_1..x_k");
    std::vector<double> data;
    std::size_t row = 0;
    while (std::getline(f, line)) {
        ++row;
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw std::runtime_error(path + ": row " + std::to_string(row) + ": ragged row");
        for (const auto& cell : cells) data.push_back(parse_double(cell, path, row));
    }
    Matrix states(row, header.size());
    states.data = std::move(data);
    return states;
}

// ---- reports ----

json to_json(const EspReport& r) {
    json j;
    j["theoretical_bound"] = r.theoretical_bound;
    j["max_measured_factor"] = r.max_measured_factor;
    j["mean_measured_factor"] = r.mean_measured_factor;
    j["trials"] = r.trials;
    j["washout_steps_measured"] = r.washout_steps_measured;
    j["washout_tol"] = r.washout_tol;
    j["washout_gap_final"] = r.washout_gap_final;
    j["contraction_respected"] = r.max_measured_factor <= r.theoretical_bound * (1.0 + 1e-12);
    return j;
}

json to_json(const DistanceReport& r) {
    json j;
    j["pass"] = r.pass;
    j["worst_ratio"] = r.worst_ratio;
    j["pairs_checked"] = r.pairs_checked;
    j["violations"] = r.violations;
    return j;
}

json to_json(const QuasiProjectionReport& r) {
    json j;
    j["gap"] = r.gap;
    j["certified_bound"] = r.certified_bound;
    j["within"] = r.within;
    return j;
}

json to_json(const LawAuditReport& r) {
    json j;
    j["k"] = r.config.k;
    j["p"] = r.config.p;
    j["M"] = r.config.m_bound;
    j["delta"] = r.config.delta;
    j["trials"] = r.config.trials;
    j["cells"] = r.config.cells;
    j["alpha"] = r.config.alpha;
    j["corr_pairs"] = r.config.corr_pairs;
    j["var_samples"] = r.config.var_samples;
    j["seed"] = r.config.seed;
    json cases = json::array();
    for (const auto& c : r.cases) {
        json cj;
        cj["l"] = c.l;
        cj["N0"] = c.n0;
        cj["lambda0"] = c.lambda0;
        cj["sigma_a"] = c.sigma_a;
        cj["ks_fraction_not_rejected"] = c.ks_fraction_not_rejected;
        json cells = json::array();
        for (const auto& cell : c.ks_cells) {
            cells.push_back(json{{"i", cell.i},
                                 {"j", cell.j},
                                 {"m", cell.m},
                                 {"p_value", cell.p_value},
                                 {"rejected", cell.rejected}});
        }
        cj["ks_cells"] = std::move(cells);
        json corrs = json::array();
        for (const auto& cc : c.correlations) {
            corrs.push_back(json{{"i", cc.i},
                                 {"j", cc.j},
                                 {"m", cc.m},
                                 {"correlation", cc.correlation},
                                 {"threshold", cc.threshold},
                                 {"ok", cc.ok}});
        }
        cj["correlations"] = std::move(corrs);
        cj["max_abs_correlation"] = c.max_abs_correlation;
        cj["correlations_ok"] = c.correlations_ok;
        cj["var_measured"] = c.var_measured;
        cj["var_expected"] = c.var_expected;
        cj["var_rel_error"] = c.var_rel_error;
        cj["b_outside_i0_zero"] = c.b_outside_i0_zero;
        cases.push_back(std::move(cj));
    }
    j["cases"] = std::move(cases);
    return j;
}

json to_json(const EspCertificate& r) {
    json j;
    j["k"] = r.config.k;
    j["p"] = r.config.p;
    j["l"] = r.config.l;
    j["M"] = r.config.m_bound;
    j["delta"] = r.config.delta;
    j["trials"] = r.config.trials;
    j["grid_points"] = r.config.grid_points;
    j["seed"] = r.config.seed;
    j["failures"] = r.failures;
    j["failure_rate"] = r.failure_rate;
    j["binomial_slack"] = r.binomial_slack;
    j["certified_level"] = r.certified_level;
    j["pass"] = r.pass;
    j["max_mp_seen"] = r.max_mp_seen;
    j["mean_mp"] = r.mean_mp;
    j["triangle_violations"] = r.triangle_violations;
    return j;
}

json to_json(const ExperimentConfig& c) {
    json j;
    j["target"] = c.target;
    j["p"] = c.p;
    j["l"] = c.l;
    j["k"] = c.k;
    j["delta"] = c.delta;
    j["epsilon"] = c.epsilon;
    j["seed"] = c.seed;
    j["n_seeds"] = c.n_seeds;
    j["washout"] = c.washout;
    j["horizon"] = c.horizon;
    j["theta"] = c.input.theta;
    j["envelope_a"] = c.input.envelope_a;
    j["ridge"] = c.ridge;
    return j;
}

namespace {

json to_json(const ReadoutTrajectory& t, const BoundBreakdown& b) {
    json j;
    j["provenance"] = t.provenance;
    j["max_error"] = t.max_error;
    j["mean_error"] = t.mean_error;
    j["violations_sqrt"] = t.violations_sqrt;
    j["violations_linear"] = t.violations_linear;
    j["holdout_max_error"] = t.holdout_max_error;
    j["holdout_mean_error"] = t.holdout_mean_error;
    if (t.ilp_applicable) {
        j["ilp_sqrt"] = b.ilp_sqrt;
        j["ilp_linear"] = b.ilp_linear;
    } else {
        j["ilp_sqrt"] = "not applicable";
        j["ilp_linear"] = "not applicable";
        j["bound_reference"] = "analytic_transport";
    }
    return j;
}

}  // namespace

json to_json(const ExperimentReport& r) {
    json j;
    j["config"] = to_json(r.config);
    j["M"] = r.m_bound;
    j["m_tilde"] = r.m_tilde;
    j["N"] = r.n;
    j["N0"] = r.n0;
    j["all_within_bounds"] = r.all_within_bounds;
    json seeds = json::array();
    for (const auto& s : r.seeds) {
        json sj;
        sj["seed"] = s.seed;
        sj["map_attempts"] = s.map_attempts;
        sj["f_norm"] = s.f_norm;
        sj["lambda0"] = s.lambda0;
        sj["w_norm"] = s.w_norm;
        sj["sup_input"] = s.sup_input;
        sj["bound"] = json{{"w_term", s.bound.w_term},
                           {"taylor_term", s.bound.taylor_term},
                           {"ilp_sqrt", s.bound.ilp_sqrt},
                           {"ilp_linear", s.bound.ilp_linear},
                           {"total_sqrt", s.bound.total_sqrt()},
                           {"total_linear", s.bound.total_linear()}};
        sj["analytic"] = to_json(s.analytic, s.bound);
        sj["fitted"] = to_json(s.fitted, s.bound);
        sj["reservoir_hash"] = s.reservoir_hash;
        seeds.push_back(std::move(sj));
    }
    j["seeds"] = std::move(seeds);
    return j;
}

json to_json(const UniversalityReport& r) {
    json j;
    j["config"] = to_json(r.shared);
    j["shared_reservoir"] = r.shared_reservoir;
    json rows = json::array();
    for (const auto& row : r.rows) {
        rows.push_back(json{{"target", row.target},
                            {"fitted_max_error", row.fitted_max_error},
                            {"fitted_mean_error", row.fitted_mean_error},
                            {"analytic_max_error", row.analytic_max_error},
                            {"bound_total_linear", row.bound_total_linear},
                            {"within_bound", row.within_bound},
                            {"readout_hash", row.readout_hash},
                            {"reservoir_hash", row.reservoir_hash}});
    }
    j["rows"] = std::move(rows);
    return j;
}

json make_report(const std::string& kind, json payload, double runtime_ms) {
    json j;
    j["report"] = kind;
    j["schema_version"] = schema_version;
    j["payload"] = std::move(payload);
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
    j["timing"] = json{{"timestamp", buf}, {"runtime_ms", runtime_ms}};
    return j;
}

void write_json(const std::string& path, const json& j) {
    auto f = open_out(path);
    f << j.dump(2) << "\n";
}

json read_json(const std::string& path) {
    auto f = open_in(path);
    json j;
    f >> j;
    return j;
}

}  // namespace sigsas::io
