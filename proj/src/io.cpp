#include "npisim/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace npisim {

namespace {

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

double parse_double(const std::string& text, const std::string& what) {
    try {
        size_t used = 0;
        const double value = std::stod(text, &used);
        while (used < text.size() && std::isspace(static_cast<unsigned char>(text[used])))
            ++used;
        if (used != text.size()) throw std::invalid_argument(text);
        return value;
    } catch (const std::exception&) {
        throw DataError("cannot parse number '" + text + "' for " + what);
    }
}

std::string fmt(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", value);
    return buf;
}

} // namespace

SingleRegionConfig load_params_file(const std::string& path) {
    auto in = open_input(path);
    std::map<std::string, double> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::string key;
        std::string rest;
        std::istringstream ss(line);
        if (!(ss >> key)) continue;
        if (!(ss >> rest)) throw DataError(path + ":" + std::to_string(lineno) +
                                           ": expected 'key value'");
        if (rest == "=" && !(ss >> rest))
            throw DataError(path + ":" + std::to_string(lineno) +
                            ": expected a value after '='");
        kv[key] = parse_double(rest, key);
    }

    SingleRegionConfig cfg;
    const auto get = [&](const std::string& key, double fallback,
                         bool required = false) {
        const auto it = kv.find(key);
        if (it == kv.end()) {
            if (required) throw DataError(path + ": missing required key '" + key + "'");
            return fallback;
        }
        return it->second;
    };

    ModelParams& p = cfg.params;
    p.beta = get("beta", 0.0, true);
    p.theta = get("theta", 0.0, true);
    p.delta = get("delta", 0.0, true);
    p.sigma = get("sigma", 0.0, true);
    p.eta_v = get("eta_v", 0.0, true);
    p.epsilon = get("epsilon", 0.0, true);
    p.gamma = get("gamma", 0.0, true);
    p.kappa_ih = get("kappa_ih", 0.0, true);
    p.kappa_id = get("kappa_id", 0.0, true);
    p.kappa_hd = get("kappa_hd", 0.0, true);
    p.rho = get("rho", 0.0, true);
    p.nu = get("nu", 0.0, true);
    p.y_rate = get("y_rate", 0.0);
    p.uptake_max = get("uptake_max", 1.0);
    p.n_pop = get("n_pop", 1.0, true);
    p.validate();

    EpiState& x = cfg.init;
    x.s = get("s0", 0.0, true);
    x.e = get("e0", 0.0);
    x.i = get("i0", 0.0);
    x.h = get("h0", 0.0);
    x.r = get("r0", 0.0);
    x.v = get("v0", 0.0);
    x.d = get("d0", 0.0);
    x.c_vax = get("c_vax0", 0.0);
    cfg.u0 = get("u0", 0.21);

    const double total = x.compartment_sum();
    if (std::abs(total - 1.0) > 1e-3)
        throw DataError(path + ": initial compartments sum to " + fmt(total) +
                        "; expected 1 within 1e-3");
    // Normalize away rounding in the published reciprocals.
    x.s /= total;
    x.e /= total;
    x.i /= total;
    x.h /= total;
    x.r /= total;
    x.v /= total;
    x.d /= total;
    x.validate();
    return cfg;
}

void save_params_file(const SingleRegionConfig& cfg, const std::string& path) {
    auto out = open_output(path);
    const ModelParams& p = cfg.params;
    out << "beta " << fmt(p.beta) << "\ntheta " << fmt(p.theta) << "\ndelta "
        << fmt(p.delta) << "\nsigma " << fmt(p.sigma) << "\neta_v "
        << fmt(p.eta_v) << "\nepsilon " << fmt(p.epsilon) << "\ngamma "
        << fmt(p.gamma) << "\nkappa_ih " << fmt(p.kappa_ih) << "\nkappa_id "
        << fmt(p.kappa_id) << "\nkappa_hd " << fmt(p.kappa_hd) << "\nrho "
        << fmt(p.rho) << "\nnu " << fmt(p.nu) << "\ny_rate " << fmt(p.y_rate)
        << "\nuptake_max " << fmt(p.uptake_max) << "\nn_pop " << fmt(p.n_pop)
        << "\n";
    const EpiState& x = cfg.init;
    out << "s0 " << fmt(x.s) << "\ne0 " << fmt(x.e) << "\ni0 " << fmt(x.i)
        << "\nh0 " << fmt(x.h) << "\nr0 " << fmt(x.r) << "\nv0 " << fmt(x.v)
        << "\nd0 " << fmt(x.d) << "\nu0 " << fmt(cfg.u0) << "\n";
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                          const std::vector<std::string>& region_names) {
    auto out = open_output(path);
    const int n = traj.n_regions();
    const bool network = n > 1;
    if (network && static_cast<int>(region_names.size()) != n)
        throw StructuralError("region names do not match trajectory width");
    out << (network ? "day,region,s,e,i,h,r,v,d,c_vax,u\n"
                    : "day,s,e,i,h,r,v,d,c_vax,u\n");
    for (int rec = 0; rec < traj.n_records(); ++rec) {
        for (int i = 0; i < n; ++i) {
            const EpiState& x = traj.states[rec][i];
            out << fmt(traj.t[rec]);
            if (network) out << ',' << region_names[i];
            out << ',' << fmt(x.s) << ',' << fmt(x.e) << ',' << fmt(x.i) << ','
                << fmt(x.h) << ',' << fmt(x.r) << ',' << fmt(x.v) << ','
                << fmt(x.d) << ',' << fmt(x.c_vax) << ',' << fmt(traj.u[rec][i])
                << '\n';
        }
    }
}

void write_closed_loop_csv(const std::string& path, const ClosedLoopTrace& trace) {
    auto out = open_output(path);
    out << "day,region,s,e,i,h,r,v,d,u,h_lim,feasible\n";
    const int n = trace.n_regions();
    for (int k = 0; k < trace.n_days(); ++k) {
        for (int i = 0; i < n; ++i) {
            const EpiState& x = trace.states[k][i];
            out << trace.day[k] << ',' << trace.region_names[i] << ','
                << fmt(x.s) << ',' << fmt(x.e) << ',' << fmt(x.i) << ','
                << fmt(x.h) << ',' << fmt(x.r) << ',' << fmt(x.v) << ','
                << fmt(x.d) << ',' << fmt(trace.u[k][i]) << ','
                << fmt(trace.h_lim_frac[i] * 1e5) << ','
                << int(trace.feasible[k][i]) << '\n';
        }
    }
}

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows) {
    auto out = open_output(path);
    out << "h_lim,y_rate,uptake,days_u1,days_u08,deaths_cutoff,status\n";
    for (const auto& row : rows) {
        out << fmt(row.h_lim) << ',' << fmt(row.y_rate) << ',' << fmt(row.uptake)
            << ',';
        if (row.days_u1) out << *row.days_u1;
        else out << "NA";
        out << ',';
        if (row.days_u08) out << *row.days_u08;
        else out << "NA";
        out << ',' << fmt(row.deaths_cutoff) << ',' << row.status << '\n';
    }
}

void write_envelope_csv(const std::string& path, const Envelope& env) {
    auto out = open_output(path);
    out << "day,quantity,mean,sd\n";
    const std::pair<const char*, const Envelope::Series*> series[] = {
        {"u", &env.u}, {"h", &env.h}, {"i", &env.i}, {"v", &env.v}};
    for (const auto& [name, s] : series)
        for (size_t k = 0; k < env.day.size(); ++k)
            out << env.day[k] << ',' << name << ',' << fmt(s->mean[k]) << ','
                << fmt(s->sd[k]) << '\n';
}

void write_drop_summary_csv(const std::string& path,
                            const std::vector<DropSummaryRow>& rows) {
    auto out = open_output(path);
    out << "region,peak_h_per100k,days_above_limit,mean_u_post_drop\n";
    for (const auto& row : rows)
        out << row.region << ',' << fmt(row.peak_h_per100k) << ','
            << row.days_above_limit << ',' << fmt(row.mean_u_post_drop) << '\n';
}

std::vector<HospCensusSeries> read_census_csv(const std::string& path,
                                              const std::string& region_filter) {
    auto in = open_input(path);
    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": empty census file");
    std::vector<HospCensusSeries> out;
    std::map<std::string, size_t> index;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 3)
            throw DataError(path + ":" + std::to_string(lineno) +
                            ": expected date,region,hospitalized");
        if (!region_filter.empty() && fields[1] != region_filter) continue;
        const auto it = index.find(fields[1]);
        size_t slot;
        if (it == index.end()) {
            slot = out.size();
            index[fields[1]] = slot;
            out.push_back(HospCensusSeries{fields[1], {}});
        } else {
            slot = it->second;
        }
        out[slot].points.push_back(
            {parse_iso_date(fields[0]), parse_double(fields[2], "hospitalized")});
    }
    for (auto& series : out) series.validate();
    return out;
}

void write_census_csv(const std::string& path, const HospCensusSeries& series) {
    auto out = open_output(path);
    out << "date,region,hospitalized\n";
    for (const auto& pt : series.points)
        out << format_iso_date(pt.date) << ',' << series.region << ','
            << fmt(pt.hospitalized) << '\n';
}

std::vector<TravelRecord> read_travel_csv(const std::string& path) {
    auto in = open_input(path);
    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": empty travel file");
    std::vector<TravelRecord> records;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 4)
            throw DataError(path + ":" + std::to_string(lineno) +
                            ": expected date,origin,destination,visits");
        records.push_back({parse_iso_date(fields[0]), fields[1], fields[2],
                           parse_double(fields[3], "visits")});
    }
    return records;
}

void write_mobility_csv(const std::string& path, const MobilityMatrix& matrix,
                        const std::vector<std::string>& regions) {
    if (static_cast<int>(regions.size()) != matrix.size())
        throw StructuralError("region names do not match matrix dimension");
    auto out = open_output(path);
    out << "region";
    for (const auto& name : regions) out << ',' << name;
    out << '\n';
    for (int i = 0; i < matrix.size(); ++i) {
        out << regions[i];
        for (int j = 0; j < matrix.size(); ++j) out << ',' << fmt(matrix.at(i, j));
        out << '\n';
    }
}

MobilityMatrix read_mobility_csv(const std::string& path,
                                 std::vector<std::string>& regions) {
    auto in = open_input(path);
    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": empty mobility file");
    auto header = split_csv_line(line);
    if (header.size() < 2)
        throw DataError(path + ": expected region names in the header");
    regions.assign(header.begin() + 1, header.end());
    const int n = static_cast<int>(regions.size());
    std::vector<double> a;
    a.reserve(static_cast<size_t>(n) * n);
    int row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (static_cast<int>(fields.size()) != n + 1)
            throw DataError(path + ": row " + std::to_string(row) +
                            " has wrong field count");
        if (row >= n) throw DataError(path + ": more rows than header columns");
        if (fields[0] != regions[row])
            throw DataError(path + ": row order must match header order ('" +
                            fields[0] + "' vs '" + regions[row] + "')");
        for (int j = 0; j < n; ++j)
            a.push_back(parse_double(fields[j + 1], "mobility entry"));
        ++row;
    }
    if (row != n) throw DataError(path + ": expected " + std::to_string(n) + " rows");
    return MobilityMatrix(n, std::move(a));
}

NetworkModel load_network_json(const std::string& path) {
    auto in = open_input(path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const std::exception& err) {
        throw DataError(path + ": " + err.what());
    }

    const auto apply_params = [](ModelParams& p, const nlohmann::json& obj) {
        const std::pair<const char*, double*> fields[] = {
            {"beta", &p.beta},         {"theta", &p.theta},
            {"delta", &p.delta},       {"sigma", &p.sigma},
            {"eta_v", &p.eta_v},       {"epsilon", &p.epsilon},
            {"gamma", &p.gamma},       {"kappa_ih", &p.kappa_ih},
            {"kappa_id", &p.kappa_id}, {"kappa_hd", &p.kappa_hd},
            {"rho", &p.rho},           {"nu", &p.nu},
            {"y_rate", &p.y_rate},     {"uptake_max", &p.uptake_max}};
        for (const auto& [key, ptr] : fields)
            if (obj.contains(key)) *ptr = obj.at(key).get<double>();
    };

    NetworkModel net;
    try {
        ModelParams defaults;
        if (doc.contains("defaults")) apply_params(defaults, doc.at("defaults"));
        if (doc.contains("uptake_max"))
            defaults.uptake_max = doc.at("uptake_max").get<double>();

        for (const auto& jr : doc.at("regions")) {
            Region reg;
            reg.name = jr.at("name").get<std::string>();
            reg.params = defaults;
            reg.params.n_pop = jr.at("population").get<double>();
            if (jr.contains("params")) apply_params(reg.params, jr.at("params"));
            reg.h_lim_per100k =
                jr.contains("h_lim_per100k") ? jr.at("h_lim_per100k").get<double>() : 8.0;

            const auto& init = jr.at("init");
            reg.init.s = init.at("s").get<double>();
            reg.init.e = init.value("e", 0.0);
            reg.init.i = init.value("i", 0.0);
            reg.init.h = init.value("h", 0.0);
            reg.init.r = init.value("r", 0.0);
            reg.init.v = init.value("v", 0.0);
            reg.init.d = init.value("d", 0.0);
            const double total = reg.init.compartment_sum();
            if (std::abs(total - 1.0) > 1e-3)
                throw DataError(path + ": region '" + reg.name +
                                "' initial compartments sum to " + fmt(total));
            reg.init.s /= total;
            reg.init.e /= total;
            reg.init.i /= total;
            reg.init.h /= total;
            reg.init.r /= total;
            reg.init.v /= total;
            reg.init.d /= total;
            net.regions.push_back(std::move(reg));
        }

        if (doc.contains("mobility_csv")) {
            const auto rel = doc.at("mobility_csv").get<std::string>();
            const auto base = std::filesystem::path(path).parent_path();
            std::vector<std::string> names;
            net.mobility = read_mobility_csv((base / rel).string(), names);
            if (static_cast<int>(names.size()) != net.size())
                throw DataError(path + ": mobility dimension does not match regions");
            for (int i = 0; i < net.size(); ++i)
                if (names[i] != net.regions[i].name)
                    throw DataError(path + ": mobility region order mismatch ('" +
                                    names[i] + "' vs '" + net.regions[i].name + "')");
        } else {
            const auto& rows = doc.at("mobility");
            std::vector<double> a;
            for (const auto& jrow : rows)
                for (const auto& val : jrow) a.push_back(val.get<double>());
            net.mobility = MobilityMatrix(net.size(), std::move(a));
        }

        if (doc.contains("y_rate_statewide"))
            net.allocate_statewide_vaccination(doc.at("y_rate_statewide").get<double>());
    } catch (const nlohmann::json::exception& err) {
        throw DataError(path + ": " + err.what());
    }

    net.validate();
    return net;
}

} // namespace npisim
