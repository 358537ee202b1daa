#include "deeprotor/cli.hpp"

#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "deeprotor/camera.hpp"
#include "deeprotor/svg.hpp"
#include "deeprotor/trainer.hpp"

namespace deeprotor {

namespace {

std::optional<uint64_t> env_seed_override() {
    const char* v = std::getenv("DEEPROTOR_SEED");
    if (!v || !*v) return std::nullopt;
    try {
        return static_cast<uint64_t>(std::stoull(v));
    } catch (const std::exception&) {
        throw std::runtime_error("DEEPROTOR_SEED is not an integer");
    }
}

void print_report(const TrainingReport& report) {
    std::cout << "episodes " << report.episodes_run << ", steps " << report.global_steps << "\n";
    for (const auto& [reason, count] : report.terminal_counts)
        std::cout << "  terminal " << reason << ": " << count << "\n";
    if (report.has_best) std::cout << "best moving-average reward " << report.best_moving_avg << "\n";
    std::cout << "wall time " << report.wall_seconds << " s\n";
}

CameraPose parse_pose(const std::string& text) {
    std::istringstream in(text);
    CameraPose pose;
    char c1, c2, c3;
    if (!(in >> pose.x >> c1 >> pose.y >> c2 >> pose.z >> c3 >> pose.yaw_deg) || c1 != ',' ||
        c2 != ',' || c3 != ',')
        throw std::runtime_error("--pose expects x,y,z,yaw");
    return pose;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"deeprotor: depth-camera quadcopter navigation trainer"};
    app.require_subcommand(1);

    // train
    auto* train = app.add_subcommand("train", "run the training loop");
    std::string train_config, train_out, train_resume;
    long train_seed = -1, train_episodes = -1;
    train->add_option("--config", train_config, "run config file")->required();
    train->add_option("--out", train_out, "output directory")->required();
    train->add_option("--resume", train_resume, "checkpoint to continue from");
    train->add_option("--seed", train_seed, "master seed override");
    train->add_option("--episodes", train_episodes, "episode count override");

    // eval
    auto* eval = app.add_subcommand("eval", "greedy rollouts of a saved model");
    std::string eval_model, eval_out, eval_arena;
    long eval_episodes = 10, eval_seed = -1;
    eval->add_option("--model", eval_model, "checkpoint file")->required();
    eval->add_option("--out", eval_out, "output directory")->required();
    eval->add_option("--arena", eval_arena, "arena override (path or builtin:<name>)");
    eval->add_option("--episodes", eval_episodes, "number of evaluation episodes");
    eval->add_option("--seed", eval_seed, "master seed override");

    // render-depth
    auto* render = app.add_subcommand("render-depth", "write one depth frame as a PGM");
    std::string render_arena, render_out, render_pose;
    CameraConfig render_cam{84, 84, 90.0, 40.0, 0.0};
    render->add_option("--arena", render_arena, "arena (path or builtin:<name>)")->required();
    render->add_option("--out", render_out, "output PGM path")->required();
    render->add_option("--pose", render_pose, "camera pose x,y,z,yaw (default: start pose)");
    render->add_option("--width", render_cam.width, "image width");
    render->add_option("--height", render_cam.height, "image height");
    render->add_option("--hfov", render_cam.hfov_deg, "horizontal field of view, degrees");
    render->add_option("--max-range", render_cam.max_range, "depth clamp, meters");

    // plot
    auto* plot = app.add_subcommand("plot", "render SVG charts from a metrics CSV");
    std::string plot_metrics, plot_out;
    plot->add_option("--metrics", plot_metrics, "metrics CSV file")->required();
    plot->add_option("--out", plot_out, "output directory")->required();

    std::vector<const char*> argv;
    argv.push_back("deeprotor");
    for (const std::string& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*train) {
            RunConfig cfg = load_run_config_file(train_config);
            if (const auto env = env_seed_override()) cfg.seed = *env;
            if (train_seed >= 0) cfg.seed = static_cast<uint64_t>(train_seed);
            if (train_episodes >= 0) cfg.episodes = train_episodes;
            print_report(train_run(cfg, train_out, train_resume));
        } else if (*eval) {
            std::optional<uint64_t> seed = env_seed_override();
            if (eval_seed >= 0) seed = static_cast<uint64_t>(eval_seed);
            print_report(eval_run(eval_model, eval_arena, eval_episodes, eval_out, seed));
        } else if (*render) {
            RunConfig cfg;
            cfg.arena_source = render_arena;
            const Arena arena = resolve_arena(cfg, 0);
            CameraPose pose{arena.start.x, arena.start.y, kFlightAltitude, arena.start.yaw_deg};
            if (!render_pose.empty()) pose = parse_pose(render_pose);
            write_pgm_file(render_out, render_depth(arena, pose, render_cam), render_cam.max_range);
            std::cout << "wrote " << render_out << "\n";
        } else if (*plot) {
            for (const std::string& path : emit_plots(plot_metrics, plot_out))
                std::cout << "wrote " << path << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace deeprotor
