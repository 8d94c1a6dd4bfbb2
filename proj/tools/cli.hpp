#pragma once

// Batch front end: classifications and checks with machine-readable output.
// One JSON document per run (keys: command, tower, result), CSV for list
// commands, SVG region plots behind --plot.

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "breuilkit/admissible.hpp"
#include "breuilkit/cohom.hpp"
#include "breuilkit/ext4.hpp"
#include "breuilkit/rank1.hpp"
#include "breuilkit/rank2.hpp"

namespace breuilkit::cli {

using json = nlohmann::ordered_json;

struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& m) : std::runtime_error(m) {}
};

namespace detail {

inline bool is_odd_prime(int n) {
    if (n < 3 || n % 2 == 0) return false;
    for (int d = 3; d * d <= n; d += 2)
        if (n % d == 0) return false;
    return true;
}

inline json tower_json(const TameTower& tw) {
    return json{{"l", tw.l},     {"e", tw.e},     {"f_rel", tw.f_rel}, {"e_L", tw.e_L},
                {"f_L", tw.f_L}, {"e_K", tw.e_K}, {"f_K", tw.f_K},     {"N", tw.N},
                {"d0", tw.d0},   {"U", tw.U},     {"V", tw.V_param}};
}

inline json character_json(const Character& chi) {
    return json{{"unit", chi.unit_rep}, {"cyclo_exp", chi.cyclo_exp}};
}

inline json rank1_json(const TameTower& tw, const Rank1Module& m) {
    return json{{"r", m.r}, {"a", m.a}, {"c", m.c}, {"character", character_json(character(m))},
                {"r_prime", tw.xprime(m.r)}};
}

inline json rank2_json(const Rank2Ext& x) {
    const TameTower& tw = *x.tw;
    return json{{"r", x.r}, {"a", x.a}, {"c", x.c}, {"s", x.s},
                {"b", x.b}, {"d", x.d}, {"n", x.n},
                {"r_prime", tw.xprime(x.r)}, {"s_prime", tw.xprime(x.s)}};
}

inline json rho_bar_json(const RhoBarForm& f) {
    json j{{"top", character_json(f.top)}, {"bottom", character_json(f.bottom)},
           {"star_nonzero", f.star_nonzero}};
    if (f.peu_ramifie)
        j["peu_ramifie"] = *f.peu_ramifie;
    else
        j["peu_ramifie"] = nullptr;
    return j;
}

inline std::string lattice_ascii(const TameTower& tw, const LatticeReport& rep, std::vector<std::string>& rows) {
    std::vector<std::vector<char>> grid(tw.l + 2, std::vector<char>(tw.l + 2, '.'));
    for (const auto& m : rep.modules) grid[tw.xprime(m.s)][tw.xprime(m.r)] = '#';
    for (int sp = tw.l + 1; sp >= 0; --sp) {
        std::string row = (sp < 10 ? " " : "") + std::to_string(sp) + " |";
        for (int rp = 0; rp <= tw.l + 1; ++rp) row += ' ', row += grid[sp][rp];
        rows.push_back(row);
    }
    std::string footer = "   +";
    for (int rp = 0; rp <= tw.l + 1; ++rp) footer += "--";
    rows.push_back(footer);
    std::string labels = "    ";
    for (int rp = 0; rp <= tw.l + 1; ++rp) labels += ' ' + std::to_string(rp % 10);
    rows.push_back(labels + "   (r' across, s' up)");
    std::string joined;
    for (const auto& r : rows) joined += r + "\n";
    return joined;
}

inline std::string lattice_svg(const TameTower& tw, const LatticeReport& rep) {
    const int cell = 28, pad = 36;
    const int size = pad * 2 + cell * (tw.l + 1);
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size
        << "\" viewBox=\"0 0 " << size << ' ' << size << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    auto xc = [&](int rp) { return pad + cell * rp; };
    auto yc = [&](int sp) { return size - pad - cell * sp; };
    for (int t = 0; t <= tw.l + 1; ++t) {
        svg << "<line x1=\"" << xc(t) << "\" y1=\"" << yc(0) << "\" x2=\"" << xc(t) << "\" y2=\""
            << yc(tw.l + 1) << "\" stroke=\"#ccc\"/>\n";
        svg << "<line x1=\"" << xc(0) << "\" y1=\"" << yc(t) << "\" x2=\"" << xc(tw.l + 1) << "\" y2=\""
            << yc(t) << "\" stroke=\"#ccc\"/>\n";
        svg << "<text x=\"" << xc(t) - 4 << "\" y=\"" << yc(0) + 18 << "\" font-size=\"11\">" << t
            << "</text>\n";
        svg << "<text x=\"" << xc(0) - 18 << "\" y=\"" << yc(t) + 4 << "\" font-size=\"11\">" << t
            << "</text>\n";
    }
    for (const auto& m : rep.modules)
        svg << "<circle cx=\"" << xc(tw.xprime(m.r)) << "\" cy=\"" << yc(tw.xprime(m.s))
            << "\" r=\"6\" fill=\"#1f6fb2\"/>\n";
    svg << "<text x=\"" << size / 2 - 30 << "\" y=\"" << size - 8 << "\" font-size=\"12\">r'</text>\n";
    svg << "<text x=\"8\" y=\"" << size / 2 << "\" font-size=\"12\">s'</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

} // namespace detail

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"breuilkit: exact classification of rank-1/rank-2 mod-l integral structures with tame descent data"};
    app.require_subcommand(1);
    long long seed = 0;
    bool timing = false;
    std::string out_path, format = "json";
    app.add_option("--seed", seed, "seed for randomized property checks (accepted for uniformity)");
    app.add_flag("--timing", timing, "include wall-clock timing in the report");
    app.add_option("--out", out_path, "write the report to a file instead of stdout");
    app.add_option("--format", format, "output format: json or csv (csv for list commands only)")
        ->check(CLI::IsMember({"json", "csv"}));

    int l = 3;
    // rank1
    auto* rank1 = app.add_subcommand("rank1", "rank-1 classes and their characters");
    rank1->fallthrough();
    bool list = false;
    std::vector<int> char_args;
    rank1->add_option("--l", l, "odd prime <= 13")->required();
    rank1->add_flag("--list", list, "list all classes");
    rank1->add_option("--char", char_args, "compute one character from r a c")->expected(3);
    // lattice
    auto* lat = app.add_subcommand("lattice", "lattice of integral models for a fixed representation");
    lat->fallthrough();
    int kk = 1, pa = 1, pb = 1, pc = 0, pd = 0;
    bool plot = false;
    lat->add_option("--l", l)->required();
    lat->add_option("--k", kk)->required();
    lat->add_option("--a", pa)->required();
    lat->add_option("--b", pb)->required();
    lat->add_option("--c", pc)->required();
    lat->add_option("--d", pd)->required();
    lat->add_flag("--plot", plot, "emit the region as ASCII and SVG");
    // admissible
    auto* adm = app.add_subcommand("admissible", "admissible rank-2 modules and descended forms for a type");
    adm->fallthrough();
    long long m_param = 1;
    bool brute = false;
    adm->add_option("--l", l)->required();
    adm->add_option("--m", m_param)->required();
    adm->add_flag("--brute", brute, "run the brute-force sweep and assert agreement");
    // ext4
    auto* ext = app.add_subcommand("ext4", "self-extension dimensions of an admissible module");
    ext->fallthrough();
    int ii = 1, jj = 0;
    bool oracle = false;
    ext->add_option("--l", l)->required();
    ext->add_option("--i", ii)->required();
    ext->add_option("--j", jj)->required();
    ext->add_option("--a", pa)->required();
    ext->add_option("--b", pb)->required();
    ext->add_flag("--oracle", oracle, "run the independent linear-algebra Ext computation");
    // cohom
    auto* coh = app.add_subcommand("cohom", "brute-force H^1 sizes for a tame tower");
    coh->fallthrough();
    int ce = 1, cf = 1, cn = 1;
    coh->add_option("--l", l)->required();
    coh->add_option("--e", ce)->required();
    coh->add_option("--f", cf)->required();
    coh->add_option("--n", cn)->required();

    std::vector<std::string> argv_rev(args.rbegin(), args.rend());
    try {
        app.parse(argv_rev);
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    }

    const auto t0 = std::chrono::steady_clock::now();
    json doc;
    {
        std::string cmdline = "breuilkit";
        for (const auto& a : args) cmdline += " " + a;
        doc["command"] = cmdline;
    }
    std::string csv;

    try {
        if (!detail::is_odd_prime(l) || l > 13) throw UsageError("--l must be an odd prime <= 13");

        if (rank1->parsed()) {
            if (list == !char_args.empty())
                throw UsageError("rank1 needs exactly one of --list or --char r a c");
            TameTower tw = TameTower::eprime(l);
            doc["tower"] = detail::tower_json(tw);
            if (list) {
                auto classes = census(tw);
                json arr = json::array();
                std::ostringstream c;
                c << "r,a,c,char_unit,char_cyclo_exp\n";
                for (const auto& mm : classes) {
                    arr.push_back(detail::rank1_json(tw, mm));
                    Character chi = character(mm);
                    c << mm.r << ',' << mm.a << ',' << mm.c << ',' << chi.unit_rep << ',' << chi.cyclo_exp
                      << "\n";
                }
                doc["result"] = json{{"count", classes.size()}, {"classes", arr}};
                csv = c.str();
            } else {
                Rank1Module mm = make_rank1(tw, char_args[0], char_args[1], char_args[2]);
                doc["result"] = detail::rank1_json(tw, mm);
            }
        } else if (lat->parsed()) {
            if (kk < 0 || kk > l) throw UsageError("--k must lie in 0..l");
            TameTower tw = TameTower::eprime(l);
            doc["tower"] = detail::tower_json(tw);
            LatticeReport rep = lattice(tw, kk, pa, pb, pc, pd);
            json mods = json::array();
            std::ostringstream c;
            c << "r_prime,s_prime,r,s,n\n";
            for (const auto& mm : rep.modules) {
                mods.push_back(detail::rank2_json(mm));
                c << tw.xprime(mm.r) << ',' << tw.xprime(mm.s) << ',' << mm.r << ',' << mm.s << ',' << mm.n
                  << "\n";
            }
            json hom = json::array();
            for (const auto& row : rep.hom) {
                json r = json::array();
                for (char v : row) r.push_back(static_cast<bool>(v));
                hom.push_back(r);
            }
            doc["result"] = json{{"k", kk},
                                 {"count", rep.modules.size()},
                                 {"modules", mods},
                                 {"hom", hom},
                                 {"maximal", rep.max_index >= 0 ? detail::rank2_json(rep.modules[rep.max_index])
                                                                : json(nullptr)},
                                 {"minimal", rep.min_index >= 0 ? detail::rank2_json(rep.modules[rep.min_index])
                                                                : json(nullptr)},
                                 {"peu_ramifie", rep.peu_ramifie ? json(*rep.peu_ramifie) : json(nullptr)}};
            if (plot) {
                std::vector<std::string> rows;
                detail::lattice_ascii(tw, rep, rows);
                doc["result"]["plot"] = json{{"ascii", rows}, {"svg", detail::lattice_svg(tw, rep)}};
            }
            csv = c.str();
        } else if (adm->parsed()) {
            TameTower tw = TameTower::eprime(l);
            doc["tower"] = detail::tower_json(tw);
            TypeTau tau = make_type(tw, m_param);
            auto mods = enumerate_admissible(tw, tau);
            bool agreement = true;
            if (brute) {
                auto bf = enumerate_admissible_brute(tw, tau);
                agreement = (bf == mods);
                if (!agreement)
                    throw InvariantError("brute-force and closed-form admissible sets disagree");
            }
            json marr = json::array(), farr = json::array(), iarr = json::array(), tarr = json::array();
            std::vector<RhoBarForm> inertia;
            for (const auto& x : mods) {
                marr.push_back(detail::rank2_json(x));
                RhoBarForm f = rho_bar_of(x);
                farr.push_back(detail::rho_bar_json(f));
                inertia.push_back(inertia_restrict(f));
            }
            std::sort(inertia.begin(), inertia.end());
            inertia.erase(std::unique(inertia.begin(), inertia.end()), inertia.end());
            for (const auto& f : inertia) iarr.push_back(detail::rho_bar_json(f));
            for (const auto& f : target_inertia_forms(tw, tau)) tarr.push_back(detail::rho_bar_json(f));
            doc["result"] = json{{"m", tau.m},
                                 {"i", tau.i},
                                 {"j", tau.j},
                                 {"count", mods.size()},
                                 {"modules", marr},
                                 {"rho_bar_forms", farr},
                                 {"inertia_forms", iarr},
                                 {"target_forms", tarr},
                                 {"forms_match_target", iarr == tarr},
                                 {"brute_checked", brute && agreement}};
            if (iarr != tarr) throw InvariantError("inertia forms do not match the target list");
        } else if (ext->parsed()) {
            TameTower tw = TameTower::eprime(l);
            doc["tower"] = detail::tower_json(tw);
            if (ii < 1 || ii > l - 1) throw DomainError("ext4: i must lie in 1..l-1");
            if (pa < 1 || pa >= l || pb < 1 || pb >= l) throw DomainError("ext4: a, b must be units mod l");
            if (ii == 1 && pa == pb) throw DomainError("ext4: i = 1 requires a != b");
            const int jn = ((jj % (l - 1)) + l - 1) % (l - 1);
            auto base = make_ext_eprime(tw, (l - 1) * ii, pa, (-jn % (l - 1) + (l - 1)) % (l - 1),
                                        (l - 1) * (l + 1 - ii), pb,
                                        ((1 - ii - jn) % (l - 1) + 2 * (l - 1)) % (l - 1));
            if (!base || base->n != 0) throw DomainError("ext4: parameters do not give an admissible module");
            ConstrainedSubspace cs = constrained_subspace(*base);
            doc["result"] = json{{"i", ii},
                                 {"j", jn},
                                 {"a", pa},
                                 {"b", pb},
                                 {"base_module", detail::rank2_json(*base)},
                                 {"normal_form_dim", 2},
                                 {"constrained_dim", cs.dim},
                                 {"constraint_basis_vz", json::array({cs.basis_vz.first, cs.basis_vz.second})}};
            if (oracle) {
                OracleDetail od = oracle_ext(*base);
                doc["result"]["oracle_dim"] = od.ext_dim;
                doc["result"]["oracle_normal_forms_independent"] = od.normal_forms_independent;
                if (od.ext_dim != 2 || !od.normal_forms_independent)
                    throw InvariantError("oracle disagrees with the two-parameter normal form");
            }
        } else if (coh->parsed()) {
            TameTower tw(l, ce, cf, 1, 1, true);
            doc["tower"] = detail::tower_json(tw);
            auto sizes = h1_sizes_bruteforce(tw, cn);
            json reps = json::array();
            for (int i = 0; i < tw.e; ++i) {
                json vals = json::array();
                for (const auto& g : tw.group_generators()) vals.push_back(tw.k.pow(g.zeta, i));
                reps.push_back(json{{"exponent", i}, {"generator_values", vals}});
            }
            doc["result"] = json{{"n", cn},
                                 {"h1_additive", sizes.first},
                                 {"h1_multiplicative", sizes.second},
                                 {"class_representatives", reps}};
        }
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const GuardError& e) {
        err << "guard refusal: " << e.what() << "\n";
        return 4;
    } catch (const DomainError& e) {
        err << "domain error: " << e.what() << "\n";
        return 3;
    } catch (const InvariantError& e) {
        err << "internal invariant violated: " << e.what() << "\n";
        return 1;
    }

    if (timing) {
        const auto t1 = std::chrono::steady_clock::now();
        doc["timing_ms"] = std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
    }
    std::string payload;
    if (format == "csv") {
        if (csv.empty()) {
            err << "usage error: --format csv is only available for list commands\n";
            return 2;
        }
        payload = csv;
    } else {
        payload = doc.dump(2) + "\n";
    }
    if (!out_path.empty()) {
        std::ofstream f(out_path);
        if (!f) {
            err << "cannot open output file " << out_path << "\n";
            return 2;
        }
        f << payload;
    } else {
        out << payload;
    }
    return 0;
}

} // namespace breuilkit::cli
