#include "mvpr/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mvpr/errors.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace mvpr {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_for_write(const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "wb"));
    if (!f) throw InputError("cannot open for writing: " + path);
    return f;
}

json parse_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open file: " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw InputError("malformed JSON in " + path + ": " + e.what());
    }
}

Vec3 to_vec3(const json& j, const std::string& what) {
    if (!j.is_array() || j.size() != 3)
        throw InputError(what + " must be an array of 3 numbers");
    return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

// accepts a flat [9] row-major array or nested [[3],[3],[3]] rows
Mat3 to_mat3(const json& j, const std::string& what) {
    Mat3 m;
    if (j.is_array() && j.size() == 9) {
        for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = j[i].get<double>();
        return m;
    }
    if (j.is_array() && j.size() == 3) {
        for (int r = 0; r < 3; ++r) {
            if (!j[r].is_array() || j[r].size() != 3)
                throw InputError(what + " rows must each have 3 numbers");
            for (int c = 0; c < 3; ++c) m(r, c) = j[r][c].get<double>();
        }
        return m;
    }
    throw InputError(what + " must be a row-major array of 9 numbers or 3 rows of 3");
}

void print_number_list(std::FILE* f, const double* v, int n) {
    for (int i = 0; i < n; ++i) std::fprintf(f, i ? ", %.17g" : "%.17g", v[i]);
}

}  // namespace

void write_pgm(const std::string& path, const BinaryMask& mask) {
    FilePtr f = open_for_write(path);
    std::fprintf(f.get(), "P5\n%d %d\n255\n", mask.width, mask.height);
    std::vector<unsigned char> bytes(mask.values.size());
    for (size_t i = 0; i < bytes.size(); ++i) bytes[i] = mask.values[i] ? 255 : 0;
    std::fwrite(bytes.data(), 1, bytes.size(), f.get());
}

void write_pgm(const std::string& path, const SilhouetteImage& img) {
    FilePtr f = open_for_write(path);
    std::fprintf(f.get(), "P5\n%d %d\n255\n", img.width, img.height);
    std::vector<unsigned char> bytes(img.values.size());
    for (size_t i = 0; i < bytes.size(); ++i)
        bytes[i] = static_cast<unsigned char>(std::lround(255.0 * img.values[i]));
    std::fwrite(bytes.data(), 1, bytes.size(), f.get());
}

BinaryMask read_pgm_mask(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open PGM file: " + path);

    auto next_token = [&]() -> std::string {
        std::string tok;
        for (;;) {
            int c = in.get();
            if (c == EOF) throw InputError("truncated PGM header: " + path);
            if (c == '#') {
                while (c != EOF && c != '\n') c = in.get();
                continue;
            }
            if (std::isspace(c)) {
                if (!tok.empty()) return tok;
                continue;
            }
            tok.push_back(static_cast<char>(c));
        }
    };

    if (next_token() != "P5") throw InputError("not a binary PGM (P5): " + path);
    const int w = std::stoi(next_token());
    const int h = std::stoi(next_token());
    const int maxval = std::stoi(next_token());
    if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255)
        throw InputError("unsupported PGM header in " + path);
    // the single whitespace after maxval was consumed by next_token

    std::vector<char> bytes(static_cast<size_t>(w) * h);
    in.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (in.gcount() != static_cast<std::streamsize>(bytes.size()))
        throw InputError("truncated PGM pixel data: " + path);

    BinaryMask mask(w, h);
    for (size_t i = 0; i < bytes.size(); ++i)
        mask.values[i] = static_cast<unsigned char>(bytes[i]) >= 128 ? 1 : 0;
    return mask;
}

void save_pose_json(const std::string& path, const Pose& pose) {
    FilePtr f = open_for_write(path);
    std::fprintf(f.get(), "{\n  \"s\": [");
    print_number_list(f.get(), pose.scale.data(), 3);
    std::fprintf(f.get(), "],\n  \"R\": [");
    double r[9];
    for (int i = 0; i < 9; ++i) r[i] = pose.rotation.matrix()(i / 3, i % 3);
    print_number_list(f.get(), r, 9);
    std::fprintf(f.get(), "],\n  \"t\": [");
    print_number_list(f.get(), pose.translation.data(), 3);
    std::fprintf(f.get(), "]\n}\n");
}

Pose load_pose_json(const std::string& path) {
    const json j = parse_json_file(path);
    if (!j.contains("s") || !j.contains("R") || !j.contains("t"))
        throw InputError("pose file " + path + " must contain fields s, R, t");
    Pose pose;
    pose.scale = to_vec3(j["s"], "pose field 's'");
    pose.rotation = Rotation::from_matrix(to_mat3(j["R"], "pose field 'R'"));
    pose.translation = to_vec3(j["t"], "pose field 't'");
    pose.validate();
    return pose;
}

SceneData load_scene_manifest(const std::string& path) {
    const json j = parse_json_file(path);
    const fs::path base = fs::path(path).parent_path();

    if (!j.contains("mesh")) throw InputError("scene manifest missing 'mesh' field");
    if (!j.contains("views") || !j["views"].is_array() || j["views"].empty())
        throw InputError("scene manifest needs a non-empty 'views' array");

    SceneData data;
    data.mesh = load_obj((base / j["mesh"].get<std::string>()).string());

    for (size_t n = 0; n < j["views"].size(); ++n) {
        const json& jv = j["views"][n];
        const std::string where = "view " + std::to_string(n);
        for (const char* key : {"mask", "intrinsics", "extrinsics"})
            if (!jv.contains(key))
                throw InputError("scene manifest " + where + " missing '" + key + "'");

        View view;
        const json& ji = jv["intrinsics"];
        for (const char* key : {"fx", "fy", "cx", "cy", "width", "height"})
            if (!ji.contains(key))
                throw InputError("scene manifest " + where + " intrinsics missing '" + key + "'");
        view.intrinsics.fx = ji["fx"].get<double>();
        view.intrinsics.fy = ji["fy"].get<double>();
        view.intrinsics.cx = ji["cx"].get<double>();
        view.intrinsics.cy = ji["cy"].get<double>();
        view.intrinsics.width = ji["width"].get<int>();
        view.intrinsics.height = ji["height"].get<int>();

        const json& je = jv["extrinsics"];
        view.extrinsics.rotation =
            Rotation::from_matrix(to_mat3(je.at("R"), where + " extrinsics R"));
        view.extrinsics.translation = to_vec3(je.at("t"), where + " extrinsics t");

        view.target = read_pgm_mask((base / jv["mask"].get<std::string>()).string());
        view.validate();
        if (view.target.empty_mask())
            throw InputError("scene manifest " + where + ": empty target mask, object not visible");
        data.views.push_back(std::move(view));
    }
    return data;
}

std::string export_scene(const std::string& dir, const TriMesh& mesh,
                         const std::vector<View>& views) {
    fs::create_directories(dir);
    const fs::path base(dir);
    save_obj(mesh, (base / "mesh.obj").string());

    FilePtr f = open_for_write((base / "scene.json").string());
    std::fprintf(f.get(), "{\n  \"mesh\": \"mesh.obj\",\n  \"views\": [\n");
    for (size_t n = 0; n < views.size(); ++n) {
        char name[32];
        std::snprintf(name, sizeof(name), "view_%03zu.pgm", n);
        write_pgm((base / name).string(), views[n].target);

        const Intrinsics& k = views[n].intrinsics;
        std::fprintf(f.get(),
                     "    {\"mask\": \"%s\",\n"
                     "     \"intrinsics\": {\"fx\": %.17g, \"fy\": %.17g, \"cx\": %.17g, "
                     "\"cy\": %.17g, \"width\": %d, \"height\": %d},\n",
                     name, k.fx, k.fy, k.cx, k.cy, k.width, k.height);
        std::fprintf(f.get(), "     \"extrinsics\": {\"R\": [");
        double r[9];
        for (int i = 0; i < 9; ++i) r[i] = views[n].extrinsics.rotation.matrix()(i / 3, i % 3);
        print_number_list(f.get(), r, 9);
        std::fprintf(f.get(), "], \"t\": [");
        print_number_list(f.get(), views[n].extrinsics.translation.data(), 3);
        std::fprintf(f.get(), "]}}%s\n", n + 1 < views.size() ? "," : "");
    }
    std::fprintf(f.get(), "  ]\n}\n");
    return (base / "scene.json").string();
}

std::vector<GraspRect> load_grasps_json(const std::string& path) {
    const json j = parse_json_file(path);
    if (!j.is_array()) throw InputError("grasp file " + path + " must be a JSON array");
    std::vector<GraspRect> out;
    for (size_t i = 0; i < j.size(); ++i) {
        const json& jg = j[i];
        const std::string where = "grasp " + std::to_string(i);
        for (const char* key : {"center", "width", "height", "angle_deg"})
            if (!jg.contains(key))
                throw InputError("grasp file " + path + ", " + where + ": missing '" + key + "'");
        if (!jg["center"].is_array() || jg["center"].size() != 2)
            throw InputError("grasp file " + path + ", " + where + ": center must be [u, v]");
        GraspRect g;
        g.center = Vec2(jg["center"][0].get<double>(), jg["center"][1].get<double>());
        g.width = jg["width"].get<double>();
        g.height = jg["height"].get<double>();
        g.angle = normalize_grasp_angle(jg["angle_deg"].get<double>() * M_PI / 180.0);
        g.validate();
        out.push_back(g);
    }
    return out;
}

void save_grasps_json(const std::string& path, const std::vector<GraspRect>& grasps) {
    FilePtr f = open_for_write(path);
    std::fprintf(f.get(), "[\n");
    for (size_t i = 0; i < grasps.size(); ++i) {
        const GraspRect& g = grasps[i];
        std::fprintf(f.get(),
                     "  {\"center\": [%.17g, %.17g], \"width\": %.17g, \"height\": %.17g, "
                     "\"angle_deg\": %.17g}%s\n",
                     g.center.x(), g.center.y(), g.width, g.height, g.angle * 180.0 / M_PI,
                     i + 1 < grasps.size() ? "," : "");
    }
    std::fprintf(f.get(), "]\n");
}

void save_refine_report_json(const std::string& path, const RefineReport& report) {
    FilePtr f = open_for_write(path);
    std::fprintf(f.get(), "{\n");
    std::fprintf(f.get(), "  \"final_loss\": %.17g,\n", report.final_loss);
    std::fprintf(f.get(), "  \"converged\": %s,\n", report.converged ? "true" : "false");
    std::fprintf(f.get(), "  \"renders_used\": %ld,\n", report.renders_used);
    std::fprintf(f.get(), "  \"final_pose\": {\"s\": [");
    print_number_list(f.get(), report.final_pose.scale.data(), 3);
    std::fprintf(f.get(), "], \"R\": [");
    double r[9];
    for (int i = 0; i < 9; ++i) r[i] = report.final_pose.rotation.matrix()(i / 3, i % 3);
    print_number_list(f.get(), r, 9);
    std::fprintf(f.get(), "], \"t\": [");
    print_number_list(f.get(), report.final_pose.translation.data(), 3);
    std::fprintf(f.get(), "]},\n");
    std::fprintf(f.get(), "  \"loss_trace\": [");
    print_number_list(f.get(), report.loss_trace.data(), static_cast<int>(report.loss_trace.size()));
    std::fprintf(f.get(), "],\n");
    std::fprintf(f.get(), "  \"coarse_losses\": [");
    for (size_t i = 0; i < report.coarse_losses.size(); ++i) {
        const auto& [bin, loss] = report.coarse_losses[i];
        std::fprintf(f.get(),
                     "%s\n    {\"index\": [%d, %d, %d], \"center\": [%.17g, %.17g, %.17g], "
                     "\"loss\": %.17g}",
                     i ? "," : "", bin.index[0], bin.index[1], bin.index[2], bin.center.x(),
                     bin.center.y(), bin.center.z(), loss);
    }
    std::fprintf(f.get(), "%s]\n}\n", report.coarse_losses.empty() ? "" : "\n  ");
}

void write_benchmark_csv(const std::string& path, const BenchmarkResult& result) {
    FilePtr f = open_for_write(path);
    std::fprintf(f.get(),
                 "kind,trial,seed,initial_geodesic_deg,final_geodesic_deg,"
                 "initial_translation_err,final_translation_err,initial_scale_err,"
                 "final_scale_err,add_err,final_loss,renders_used\n");
    auto row = [&](const char* kind, const char* trial, const char* seed, const TrialRecord& r) {
        std::fprintf(f.get(), "%s,%s,%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%ld\n",
                     kind, trial, seed, r.initial_geodesic_deg, r.final_geodesic_deg,
                     r.initial_translation_err, r.final_translation_err, r.initial_scale_err,
                     r.final_scale_err, r.add_err, r.final_loss, r.renders_used);
    };
    for (size_t t = 0; t < result.records.size(); ++t) {
        char trial[24], seed[24];
        std::snprintf(trial, sizeof(trial), "%zu", t);
        std::snprintf(seed, sizeof(seed), "%llu",
                      static_cast<unsigned long long>(result.records[t].seed));
        row("record", trial, seed, result.records[t]);
    }
    row("mean", "", "", result.mean);
    row("stddev", "", "", result.stddev);
}

void write_convergence_csv(const std::string& path, const std::vector<ConvergenceRow>& rows) {
    FilePtr f = open_for_write(path);
    std::fprintf(f.get(), "n_views,trials,mean_final_loss,stddev_final_loss\n");
    for (const ConvergenceRow& r : rows)
        std::fprintf(f.get(), "%d,%d,%.17g,%.17g\n", r.n_views, r.trials, r.mean_final_loss,
                     r.stddev_final_loss);
}

}  // namespace mvpr
