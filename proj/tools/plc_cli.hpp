#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "plc/ik.hpp"
#include "plc/model.hpp"
#include "plc/normalize.hpp"
#include "plc/planner.hpp"
#include "plc/stiffness.hpp"
#include "plc/workspace.hpp"
#include "plc/workspace_io.hpp"

#ifndef PLC_DATA_DIR
#define PLC_DATA_DIR "data"
#endif

namespace plc::cli {

inline constexpr const char* kVersion = "1.0.0";

enum ExitCode : int { kOk = 0, kUsage = 1, kDomain = 2, kIo = 3 };

/// Malformed command-line value (maps to exit code 1).
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// 9 significant digits, '.' separator, negative zero printed as 0.
inline std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    std::string s(buf);
    if (s == "-0") s = "0";
    return s;
}

inline std::string format_signed(double v) {
    std::string s = format_number(v);
    return (v > 0 ? "+" : "") + s;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(s);
    while (std::getline(in, cell, sep)) out.push_back(cell);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

inline double parse_double(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (s.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw UsageError(what + ": '" + s + "' is not a number");
    }
}

inline Eigen::Vector3d parse_vector(const std::string& s, const std::string& what) {
    const auto parts = split(s, ',');
    if (parts.size() != 3) throw UsageError(what + ": expected \"x,y,z\"");
    return {parse_double(parts[0], what), parse_double(parts[1], what), parse_double(parts[2], what)};
}

inline Eigen::Vector3d parse_direction(const std::string& s) {
    const Eigen::Vector3d v = parse_vector(s, "--direction");
    if (!(v.norm() > 0)) throw UsageError("--direction must be non-zero");
    return v.normalized();
}

inline Configuration parse_configuration(const std::string& s, const RobotDescription& desc, const std::string& what) {
    std::vector<int> idx;
    for (const auto& part : split(s, ',')) {
        try {
            std::size_t used = 0;
            idx.push_back(std::stoi(part, &used));
            if (part.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(part);
        } catch (const std::exception&) {
            throw UsageError(what + ": '" + part + "' is not a tooth index");
        }
    }
    Configuration c(std::move(idx), desc.tooth_count);
    require_valid(c, desc);
    return c;
}

inline std::string join_indices(const Configuration& c, char sep = ',') {
    std::string out;
    for (std::size_t j = 0; j < c.size(); ++j) {
        if (j) out.push_back(sep);
        out += std::to_string(c.index(j));
    }
    return out;
}

inline RobotDescription load_robot(const std::string& source, double budget) {
    if (source == "default") {
        RobotDescription d = default_robot();
        validate(d, budget);
        return d;
    }
    return parse_robot_description(read_file(source), budget);
}

inline std::filesystem::path cache_dir() {
    if (const char* p = std::getenv("PLC_CACHE_DIR"); p && *p) return p;
    if (const char* p = std::getenv("XDG_CACHE_HOME"); p && *p) return std::filesystem::path(p) / "plc";
    if (const char* p = std::getenv("HOME"); p && *p) return std::filesystem::path(p) / ".cache" / "plc";
    return ".plc-cache";
}

inline std::filesystem::path cache_path(const RobotDescription& desc) {
    char name[64];
    std::snprintf(name, sizeof name, "workspace-%016llx.plcw", static_cast<unsigned long long>(workspace_hash(desc)));
    return cache_dir() / name;
}

/// Cached index for `desc`, rebuilt when missing or stale.
inline WorkspaceIndex cached_index(const RobotDescription& desc, double budget, std::ostream& err) {
    const auto path = cache_path(desc);
    const auto hash = workspace_hash(desc);
    std::error_code ec;
    if (std::filesystem::exists(path, ec)) {
        try {
            auto decoded = load_index(path);
            if (decoded.description_hash == hash) return std::move(decoded.index);
        } catch (const IoError&) {
            // unreadable cache entry: rebuild below
        }
    }
    WorkspaceIndex index = enumerate_workspace(desc, budget);
    try {
        save_index(path, index, hash);
    } catch (const IoError& e) {
        err << "warning: could not write index cache: " << e.what() << "\n";
    }
    return index;
}

/// Index from --index when given (rebuilt in memory if it was made for another robot), else the cache.
inline WorkspaceIndex resolve_index(const std::string& index_path, const RobotDescription& desc, bool robot_explicit,
                                    double budget, std::ostream& err) {
    if (index_path.empty()) return cached_index(desc, budget, err);
    auto decoded = load_index(index_path);
    if (robot_explicit && decoded.description_hash != workspace_hash(desc)) {
        err << "warning: " << index_path << " was built for a different robot description; regenerating in memory\n";
        return enumerate_workspace(desc, budget);
    }
    return std::move(decoded.index);
}

inline std::vector<Eigen::Vector3d> parse_points_csv(const std::string& text) {
    std::vector<Eigen::Vector3d> out;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos || line.front() == '#') continue;
        const auto cells = split(line, ',');
        if (cells.size() < 3) throw SchemaError("queries", "line " + std::to_string(lineno) + " needs x,y,z");
        if (out.empty() && lineno == 1 && cells[0].find_first_of("0123456789") == std::string::npos) continue;
        Eigen::Vector3d p;
        for (int i = 0; i < 3; ++i) {
            try {
                std::size_t used = 0;
                p[i] = std::stod(cells[static_cast<std::size_t>(i)], &used);
            } catch (const std::exception&) {
                throw SchemaError("queries", "line " + std::to_string(lineno) + ": not a number");
            }
        }
        out.push_back(p);
    }
    if (out.empty()) throw SchemaError("queries", "no query points");
    return out;
}

inline void emit(const std::string& payload, const std::string& out_path, std::ostream& out) {
    if (out_path.empty())
        out << payload;
    else
        write_file_atomic(out_path, payload);
}

// ---------------------------------------------------------------------------
// Renderers
// ---------------------------------------------------------------------------

inline std::string render_fk(const RobotDescription& desc, const Configuration& config) {
    const ChainPose pose = chain_pose(desc, config);
    const Eigen::Vector3d tip = tool_tip(pose.end, desc.tool_offset);
    std::string s = "x,y,z,r11,r12,r13,r21,r22,r23,r31,r32,r33,tip_x,tip_y,tip_z\n";
    std::vector<double> row{pose.end.translation.x(), pose.end.translation.y(), pose.end.translation.z()};
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) row.push_back(pose.end.rotation(r, c));
    row.insert(row.end(), {tip.x(), tip.y(), tip.z()});
    for (std::size_t i = 0; i < row.size(); ++i) s += (i ? "," : "") + format_number(row[i]);
    return s + "\n";
}

inline std::string render_points_csv(const WorkspaceIndex& index) {
    std::string s = "x,y,z,bucket_size\n";
    for (std::size_t i = 0; i < index.point_count(); ++i) {
        const auto& p = index.point(i);
        s += format_number(p.x()) + "," + format_number(p.y()) + "," + format_number(p.z()) + "," +
             std::to_string(index.bucket_size(i)) + "\n";
    }
    return s;
}

inline std::string render_points_ply(const WorkspaceIndex& index) {
    std::string s = "ply\nformat ascii 1.0\ncomment reachable end-effector positions, mm\n";
    s += "element vertex " + std::to_string(index.point_count()) + "\n";
    s += "property double x\nproperty double y\nproperty double z\nproperty uint bucket_size\nend_header\n";
    for (std::size_t i = 0; i < index.point_count(); ++i) {
        const auto& p = index.point(i);
        s += format_number(p.x()) + " " + format_number(p.y()) + " " + format_number(p.z()) + " " +
             std::to_string(index.bucket_size(i)) + "\n";
    }
    return s;
}

inline std::string render_samples(const std::vector<DirectionalSample>& samples) {
    std::string s = "dx,dy,dz,stiffness_N_per_mm,compliance_mm_per_N,disp_x_mm,disp_y_mm,disp_z_mm\n";
    for (const auto& m : samples) {
        const double row[] = {m.direction.x(), m.direction.y(), m.direction.z(), m.stiffness, m.compliance,
                              m.displacement.x(), m.displacement.y(), m.displacement.z()};
        for (std::size_t i = 0; i < std::size(row); ++i) s += (i ? "," : "") + format_number(row[i]);
        s += "\n";
    }
    return s;
}

inline std::string render_comparison(const std::vector<ComparisonRow>& rows) {
    auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string("NA"); };
    auto quote = [](const std::string& name) {
        if (name.find_first_of(",\"") == std::string::npos) return name;
        std::string q = "\"";
        for (char c : name) q += c == '"' ? std::string("\"\"") : std::string(1, c);
        return q + "\"";
    };
    std::string s =
        "name,k_max,k_min,k_max_normalized,k_min_normalized,ratio,reported_max_normalized,reported_min_normalized\n";
    for (const auto& r : rows) {
        s += quote(r.record.name) + "," + format_number(r.record.k_max) + "," + format_number(r.record.k_min) + "," +
             opt(r.max_normalized) + "," + opt(r.min_normalized) + "," + format_number(r.ratio) + "," +
             opt(r.record.reported_max_normalized) + "," + opt(r.record.reported_min_normalized) + "\n";
    }
    return s;
}

inline std::string render_plan(const RobotDescription& desc, const std::vector<ActuationStep>& plan) {
    std::string s;
    for (const auto& step : plan) {
        switch (step.kind) {
            case ActuationStep::Kind::Unlock: s += "unlock " + std::to_string(step.joint + 1) + "\n"; break;
            case ActuationStep::Kind::Lock: s += "lock " + std::to_string(step.joint + 1) + "\n"; break;
            case ActuationStep::Kind::RotateShaft:
                s += "rotate " + format_signed(360.0 * step.pitches / desc.tooth_count) + "\n";
                break;
        }
    }
    return s;
}

// ---------------------------------------------------------------------------
// dispatch
// ---------------------------------------------------------------------------

/// Runs one command. `args` excludes the program name.
inline int dispatch(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Discrete kinematics, stiffness and actuation planning for locking-cell robots", "plc"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("plc ") + kVersion + " (workspace index format " +
                                          std::to_string(kIndexFormatVersion) + ")");

    std::string robot = "default";
    double budget = kDefaultEnumerationBudget;
    auto add_robot = [&](CLI::App* sub) {
        sub->add_option("--robot", robot, "Robot description JSON file, or 'default'")->capture_default_str();
        sub->add_option("--budget", budget, "Maximum tooth_count^segment_count to enumerate")->capture_default_str();
    };

    // fk
    auto* fk = app.add_subcommand("fk", "Forward kinematics of one configuration");
    add_robot(fk);
    std::string config_text;
    fk->add_option("--config", config_text, "Tooth indices k1,...,kn")->required();

    // workspace
    auto* ws = app.add_subcommand("workspace", "Enumerate and analyse the reachable set");
    ws->require_subcommand(1);
    std::string index_path, out_path, format = "csv", queries_path;
    std::size_t local_k = 0;
    auto* ws_build = ws->add_subcommand("build", "Enumerate all configurations and save the index");
    add_robot(ws_build);
    ws_build->add_option("--out", out_path, "Index file (defaults to the cache)");
    auto* ws_export = ws->add_subcommand("export", "Write the distinct reachable points");
    add_robot(ws_export);
    ws_export->add_option("--index", index_path, "Index file");
    ws_export->add_option("--format", format, "ply or csv")->check(CLI::IsMember({"ply", "csv"}))->capture_default_str();
    ws_export->add_option("--out", out_path, "Output file (stdout if omitted)");
    auto* ws_omni = ws->add_subcommand("omnivariance", "Omnivariance of the reachable point cloud");
    add_robot(ws_omni);
    ws_omni->add_option("--index", index_path, "Index file");
    ws_omni->add_option("--local", local_k, "Per-point omnivariance over k nearest neighbours");
    auto* ws_acc = ws->add_subcommand("accuracy", "Worst nearest-reachable distance over query points");
    add_robot(ws_acc);
    ws_acc->add_option("--index", index_path, "Index file");
    ws_acc->add_option("--queries", queries_path, "CSV of x,y,z query points")->required();

    // ik
    auto* ik = app.add_subcommand("ik", "Inverse kinematics by nearest reachable point");
    add_robot(ik);
    std::string target_text, reference_text, metric = "circular";
    std::optional<std::uint64_t> seed;
    ik->add_option("--index", index_path, "Index file")->required();
    ik->add_option("--target", target_text, "Target position x,y,z (mm)")->required();
    ik->add_option("--reference", reference_text, "Reference tooth indices (defaults to all zero)");
    ik->add_option("--metric", metric, "circular or euclidean")
        ->check(CLI::IsMember({"circular", "euclidean"}))
        ->capture_default_str();
    ik->add_option("--seed", seed, "Break equal-distance ties randomly with this seed");

    // stiffness
    auto* st = app.add_subcommand("stiffness", "Firmed, loosening and twisting stiffness");
    st->require_subcommand(1);
    std::string direction_text;
    int sphere = 0;
    double force = kMapForce, tension = 0.0, torque = 0.0, max_force = 0.0;
    int samples = 21;
    bool literal_polar = false, skin = false, spine = false;
    auto* st_firm = st->add_subcommand("firm", "Directional firmed stiffness of a configuration");
    add_robot(st_firm);
    st_firm->add_option("--config", config_text, "Tooth indices (defaults to all zero)");
    auto* dir_opt = st_firm->add_option("--direction", direction_text, "Load direction x,y,z");
    st_firm->add_option("--sphere", sphere, "Number of Fibonacci-sphere directions")->excludes(dir_opt);
    st_firm->add_option("--force", force, "Force magnitude for displacement columns (N)")->capture_default_str();
    st_firm->add_flag("--literal-polar", literal_polar, "Use the polar moment in the bending term");
    auto* st_curve = st->add_subcommand("curve", "Piecewise-linear force/deflection samples");
    add_robot(st_curve);
    st_curve->add_option("--config", config_text, "Tooth indices (defaults to all zero)");
    st_curve->add_option("--tension", tension, "Tendon tension (N)")->required();
    st_curve->add_option("--direction", direction_text, "Load direction x,y,z")->required();
    st_curve->add_option("--max-force", max_force, "Largest sampled force (N); default 2x threshold");
    st_curve->add_option("--samples", samples, "Number of samples")->capture_default_str();
    st_curve->add_flag("--literal-polar", literal_polar, "Use the polar moment in the bending term");
    auto* st_twist = st->add_subcommand("twist", "Twist of the spine or origami skin under a torque");
    add_robot(st_twist);
    auto* skin_flag = st_twist->add_flag("--skin", skin, "Origami skin");
    st_twist->add_flag("--spine", spine, "Resin spine")->excludes(skin_flag);
    st_twist->add_option("--torque", torque, "Torque (N*mm)")->required();

    // plan
    auto* pl = app.add_subcommand("plan", "Unlock/rotate/lock schedule between configurations");
    add_robot(pl);
    std::string start_text, goal_text;
    bool verify = false;
    pl->add_option("--start", start_text, "Start tooth indices")->required();
    pl->add_option("--goal", goal_text, "Goal tooth indices")->required();
    pl->add_flag("--verify", verify, "Simulate the schedule and print the end state");

    // normalize
    auto* nz = app.add_subcommand("normalize", "Size-normalized stiffness comparison table");
    std::string designs_path;
    nz->add_option("--designs", designs_path, "Designs CSV, or 'reference' for the bundled table")->required();
    nz->add_option("--out", out_path, "Output CSV (stdout if omitted)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kUsage;
    }

    auto robot_given = [&](CLI::App* sub) { return sub->get_option("--robot")->count() > 0; };

    try {
        if (fk->parsed()) {
            const auto desc = load_robot(robot, budget);
            out << render_fk(desc, parse_configuration(config_text, desc, "--config"));
        } else if (ws_build->parsed()) {
            const auto desc = load_robot(robot, budget);
            const auto index = enumerate_workspace(desc, budget);
            const std::filesystem::path path = out_path.empty() ? cache_path(desc) : std::filesystem::path(out_path);
            save_index(path, index, workspace_hash(desc));
            out << "configurations,points,index\n"
                << index.configuration_count() << "," << index.point_count() << "," << path.string() << "\n";
        } else if (ws_export->parsed()) {
            const auto desc = load_robot(robot, budget);
            const auto index = resolve_index(index_path, desc, robot_given(ws_export), budget, err);
            emit(format == "ply" ? render_points_ply(index) : render_points_csv(index), out_path, out);
        } else if (ws_omni->parsed()) {
            const auto desc = load_robot(robot, budget);
            const auto index = resolve_index(index_path, desc, robot_given(ws_omni), budget, err);
            if (local_k > 0) {
                const auto local = local_omnivariance(index, local_k);
                std::string s = "x,y,z,omnivariance\n";
                for (std::size_t i = 0; i < local.size(); ++i) {
                    const auto& p = index.point(i);
                    s += format_number(p.x()) + "," + format_number(p.y()) + "," + format_number(p.z()) + "," +
                         format_number(local[i]) + "\n";
                }
                out << s;
            } else {
                out << format_number(omnivariance(index.points())) << "\n";
            }
        } else if (ws_acc->parsed()) {
            const auto desc = load_robot(robot, budget);
            const auto queries = parse_points_csv(read_file(queries_path));
            const auto index = resolve_index(index_path, desc, robot_given(ws_acc), budget, err);
            out << format_number(reach_accuracy(index, queries)) << "\n";
        } else if (ik->parsed()) {
            const auto desc = load_robot(robot, budget);
            const Eigen::Vector3d target = parse_vector(target_text, "--target");
            const Configuration reference = reference_text.empty()
                                                ? Configuration::zeros(desc.segment_count, desc.tooth_count)
                                                : parse_configuration(reference_text, desc, "--reference");
            const auto index = resolve_index(index_path, desc, robot_given(ik), budget, err);
            IkOptions opt;
            opt.metric = metric == "euclidean" ? AngularMetric::Euclidean : AngularMetric::Circular;
            opt.seed = seed;
            const auto sol = solve_ik(index, desc, target, reference, opt);
            std::string s;
            for (int j = 1; j <= desc.segment_count; ++j) s += "k" + std::to_string(j) + ",";
            s += "x,y,z,error_mm,candidates\n" + join_indices(sol.config) + "," +
                 format_number(sol.achieved_position.x()) + "," + format_number(sol.achieved_position.y()) + "," +
                 format_number(sol.achieved_position.z()) + "," + format_number(sol.position_error) + "," +
                 std::to_string(sol.candidate_count) + "\n";
            out << s;
        } else if (st_firm->parsed()) {
            const auto desc = load_robot(robot, budget);
            const Configuration config = config_text.empty()
                                             ? Configuration::zeros(desc.segment_count, desc.tooth_count)
                                             : parse_configuration(config_text, desc, "--config");
            StiffnessOptions opt{literal_polar};
            std::vector<DirectionalSample> rows;
            if (sphere > 0) {
                rows = stiffness_map(desc, config, sphere, force, opt);
            } else {
                const auto k = firmed_compliance(desc, config, opt);
                std::vector<Eigen::Vector3d> dirs;
                if (!direction_text.empty())
                    dirs.push_back(parse_direction(direction_text));
                else
                    dirs = {Eigen::Vector3d::UnitX(), Eigen::Vector3d::UnitY(), Eigen::Vector3d::UnitZ()};
                for (const auto& u : dirs) {
                    const double c = directional_compliance(k, u);
                    rows.push_back({u, k.displacement(force * u), 1.0 / c, c});
                }
            }
            out << render_samples(rows);
        } else if (st_curve->parsed()) {
            const auto desc = load_robot(robot, budget);
            const Configuration config = config_text.empty()
                                             ? Configuration::zeros(desc.segment_count, desc.tooth_count)
                                             : parse_configuration(config_text, desc, "--config");
            if (samples < 2) throw UsageError("--samples must be >= 2");
            const auto curve = force_deflection(desc, config, tension, parse_direction(direction_text),
                                                StiffnessOptions{literal_polar});
            double top = max_force > 0 ? max_force : 2.0 * curve.threshold_force;
            if (!(top > 0)) top = kMapForce;
            std::string s = "force_N,deflection_mm,state\n";
            for (int i = 0; i < samples; ++i) {
                const double f = top * i / (samples - 1);
                s += format_number(f) + "," + format_number(curve.deflection_at(f)) + "," +
                     (curve.loosened_at(f) ? "loose" : "firm") + "\n";
            }
            out << s;
        } else if (st_twist->parsed()) {
            if (!skin && !spine) throw UsageError("stiffness twist needs --skin or --spine");
            const auto desc = load_robot(robot, budget);
            const double twist = skin ? skin_twist(desc, torque) : spine_twist(desc, torque);
            out << "component,torque_Nmm,twist_rad,twist_deg\n"
                << (skin ? "skin" : "spine") << "," << format_number(torque) << "," << format_number(twist) << ","
                << format_number(twist * 180.0 / kPi) << "\n";
        } else if (pl->parsed()) {
            const auto desc = load_robot(robot, budget);
            const auto start = parse_configuration(start_text, desc, "--start");
            const auto goal = parse_configuration(goal_text, desc, "--goal");
            const auto plan = plan_to(desc, start, goal);
            std::string s = render_plan(desc, plan);
            if (verify) {
                const JointState end = execute(JointState::all_locked(start), plan).back();
                if (end.angles != goal || end.unlocked_count() != 0)
                    throw DomainError("simulated schedule ended at " + join_indices(end.angles) + ", not the goal");
                s += "end " + join_indices(end.angles) + "\n";
                s += "locked " + std::to_string(end.locked.size() - end.unlocked_count()) + "/" +
                     std::to_string(end.locked.size()) + "\n";
            }
            out << s;
        } else if (nz->parsed()) {
            const std::string path =
                designs_path == "reference" ? std::string(PLC_DATA_DIR) + "/reference_designs.csv" : designs_path;
            const auto records = parse_designs_csv(read_file(path));
            emit(render_comparison(build_comparison(records)), out_path, out);
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kIo;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kDomain;
    }
    return kOk;
}

}  // namespace plc::cli
