#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "deeprotor/checkpoint.hpp"
#include "deeprotor/cli.hpp"
#include "deeprotor/config.hpp"
#include "deeprotor/metrics.hpp"
#include "deeprotor/svg.hpp"
#include "deeprotor/trainer.hpp"

using namespace deeprotor;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

fs::path test_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("deeprotor_test_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// Small-but-real training config: tiny observation, tiny net, a few dozen
// steps per episode.
std::string tiny_config_text(const std::string& extra = "") {
    return "arena builtin:lane\n"
           "algorithm ddqn\n"
           "episodes 3\n"
           "seed 11\n"
           "obs_width 9\n"
           "obs_height 9\n"
           "conv 4 3 2\n"
           "dense 8\n"
           "base_steps 30\n"
           "steps_per_episode 0\n"
           "step_cap 30\n"
           "batch_size 4\n"
           "train_every 4\n"
           "warmup 8\n"
           "buffer_capacity 64\n"
           "eps_decay_steps 100\n"
           "checkpoint_interval 0\n" +
           extra;
}

}  // namespace

TEST_CASE("run config echo round-trips") {
    RunConfig cfg = parse_run_config(tiny_config_text());
    const std::string echo = cfg.echo();
    const RunConfig again = parse_run_config(echo);
    CHECK(again.echo() == echo);
    CHECK(again.seed == 11);
    CHECK(again.camera.width == 9);
    CHECK(again.convs.size() == 1);
    CHECK(again.hidden == std::vector<int>{8});
}

TEST_CASE("config parser reports unknown keys and bad values") {
    CHECK_THROWS_WITH_AS(parse_run_config("bogus_key 1\n"), doctest::Contains("unknown key"),
                         std::runtime_error);
    CHECK_THROWS_WITH_AS(parse_run_config("episodes x\n"), doctest::Contains("line 1"),
                         std::runtime_error);
    CHECK_THROWS_AS(parse_run_config("gamma 1.5\n"), std::runtime_error);
    CHECK_THROWS_AS(parse_run_config("algorithm sarsa\n"), std::runtime_error);
}

TEST_CASE("primitive reward preset zeroes everything but collisions") {
    const RunConfig cfg = parse_run_config("reward_preset primitive\n");
    CHECK(cfg.reward.w_progress == 0.0);
    CHECK(cfg.reward.w_deviation == 0.0);
    CHECK(cfg.reward.w_yaw == 0.0);
    CHECK(cfg.reward.r_goal == 0.0);
    CHECK(cfg.reward.r_checkpoint == 0.0);
    CHECK(cfg.reward.r_collision == 50.0);
    // explicit keys still override the preset
    const RunConfig over = parse_run_config("reward_preset primitive\nw_progress 0.5\n");
    CHECK(over.reward.w_progress == 0.5);
}

TEST_CASE("metrics rows match the declared format") {
    CHECK(std::string(kMetricsHeader) ==
          "episode,steps,total_reward,moving_avg_reward,terminal_reason,epsilon,mean_abs_yaw_rate,"
          "mean_roll,mean_pitch,checkpoints_hit,cumulative_collisions");
    MetricsRow row;
    row.episode = 4;
    row.steps = 100;
    row.total_reward = 1.23456789;
    row.moving_avg_reward = -2.0;
    row.terminal_reason = "collision";
    row.epsilon = 0.5;
    row.checkpoints_hit = 2;
    row.cumulative_collisions = 3;
    const std::string line = format_metrics_row(row);
    CHECK(line == "4,100,1.23457,-2,collision,0.5,0,0,0,2,3");
}

TEST_CASE("render-depth writes a valid 84x84 P2 file") {
    const fs::path dir = test_dir("render");
    const std::string out = (dir / "frame.pgm").string();
    CHECK(run_cli({"render-depth", "--arena", "builtin:corridor", "--out", out}) == 0);
    std::ifstream in(out);
    REQUIRE(in.good());
    std::string magic;
    int w = 0, h = 0, maxval = 0;
    in >> magic >> w >> h >> maxval;
    CHECK(magic == "P2");
    CHECK(w == 84);
    CHECK(h == 84);
    CHECK(maxval == 255);
    int count = 0;
    for (int v = 0; in >> v;) ++count;
    CHECK(count == 84 * 84);
}

TEST_CASE("cli surfaces errors as nonzero exit codes") {
    CHECK(run_cli({"render-depth", "--arena", "builtin:nope", "--out", "/tmp/x.pgm"}) == 1);
    CHECK(run_cli({"train", "--config", "/nonexistent.cfg", "--out", "/tmp/x"}) == 1);
    CHECK(run_cli({"definitely-not-a-command"}) != 0);
}

TEST_CASE("train with zero episodes writes only the header") {
    const fs::path dir = test_dir("zero_episodes");
    RunConfig cfg = parse_run_config(tiny_config_text());
    cfg.episodes = 0;
    train_run(cfg, dir.string());
    CHECK(read_file(dir / "metrics.csv") == std::string(kMetricsHeader) + "\n");
    CHECK(fs::exists(dir / "config_echo.txt"));
}

TEST_CASE("training metrics are byte-identical across reruns and echo reruns") {
    const fs::path d1 = test_dir("det1");
    const fs::path d2 = test_dir("det2");
    const fs::path d3 = test_dir("det3");
    const RunConfig cfg = parse_run_config(tiny_config_text());
    train_run(cfg, d1.string());
    train_run(cfg, d2.string());
    const std::string m1 = read_file(d1 / "metrics.csv");
    CHECK(m1 == read_file(d2 / "metrics.csv"));
    // re-run from the emitted echo file
    const RunConfig from_echo = load_run_config_file((d1 / "config_echo.txt").string());
    train_run(from_echo, d3.string());
    CHECK(m1 == read_file(d3 / "metrics.csv"));
    CHECK(fs::exists(d1 / "checkpoint_final.ckpt"));
}

TEST_CASE("resume reproduces the uninterrupted run exactly") {
    const fs::path full_dir = test_dir("resume_full");
    const fs::path part_dir = test_dir("resume_part");
    const fs::path rest_dir = test_dir("resume_rest");

    RunConfig cfg = parse_run_config(tiny_config_text());
    cfg.episodes = 6;
    cfg.checkpoint_interval = 3;
    train_run(cfg, full_dir.string());

    RunConfig half = cfg;
    half.episodes = 3;
    half.checkpoint_interval = 0;
    train_run(half, part_dir.string());

    train_run(cfg, rest_dir.string(), (full_dir / "checkpoint_ep3.ckpt").string());

    const MetricsTable full = load_metrics_csv_file((full_dir / "metrics.csv").string());
    const MetricsTable rest = load_metrics_csv_file((rest_dir / "metrics.csv").string());
    REQUIRE(full.rows.size() == 6);
    REQUIRE(rest.rows.size() == 3);
    for (size_t i = 0; i < 3; ++i) {
        const MetricsRow& a = full.rows[3 + i];
        const MetricsRow& b = rest.rows[i];
        CHECK(format_metrics_row(a) == format_metrics_row(b));
    }
}

TEST_CASE("resume rejects a different configuration") {
    const fs::path dir = test_dir("resume_reject");
    RunConfig cfg = parse_run_config(tiny_config_text());
    train_run(cfg, dir.string());
    RunConfig other = cfg;
    other.seed = 999;
    CHECK_THROWS_WITH_AS(train_run(other, dir.string(), (dir / "checkpoint_final.ckpt").string()),
                         doctest::Contains("config differs"), std::runtime_error);
}

TEST_CASE("eval writes rows but no parameter files") {
    const fs::path train_dir = test_dir("eval_train");
    const fs::path eval_dir = test_dir("eval_out");
    const RunConfig cfg = parse_run_config(tiny_config_text());
    train_run(cfg, train_dir.string());

    const TrainingReport report =
        eval_run((train_dir / "checkpoint_final.ckpt").string(), "", 10, eval_dir.string());
    CHECK(report.episodes_run == 10);
    const MetricsTable table = load_metrics_csv_file((eval_dir / "metrics.csv").string());
    CHECK(table.rows.size() == 10);
    for (const auto& entry : fs::directory_iterator(eval_dir))
        CHECK(entry.path().extension() != ".ckpt");
}

TEST_CASE("tabular-grid training learns the lane and checkpoints exactly") {
    const fs::path dir = test_dir("tabular");
    RunConfig cfg = parse_run_config(
        "arena builtin:lane\nalgorithm tabular-grid\nepisodes 300\nseed 5\n"
        "alpha 1\ngamma 0.9\ncell_size 1\neps_start 1\neps_end 1\neps_decay_steps 1\n"
        "base_steps 80\nsteps_per_episode 0\nstep_cap 80\n");
    const TrainingReport report = train_run(cfg, dir.string());
    CHECK(report.episodes_run == 300);
    CHECK(report.terminal_counts.count("goal") == 1);

    // greedy eval reaches the goal every time after random-walk training
    const fs::path eval_dir = test_dir("tabular_eval");
    const TrainingReport eval = eval_run((dir / "checkpoint_final.ckpt").string(), "", 5, eval_dir.string());
    CHECK(eval.terminal_counts.at("goal") == 5);
}

TEST_CASE("emit_plots writes the chart suite with one vertex per episode") {
    const fs::path dir = test_dir("plots_src");
    const fs::path out = test_dir("plots_out");
    RunConfig cfg = parse_run_config(tiny_config_text());
    cfg.episodes = 5;
    train_run(cfg, dir.string());

    const auto files = emit_plots((dir / "metrics.csv").string(), out.string());
    CHECK(files.size() == 5);
    const std::string reward_svg = read_file(out / "reward.svg");

    // one polyline vertex per episode on both series
    size_t pos = 0;
    int polylines = 0;
    while ((pos = reward_svg.find("points=\"", pos)) != std::string::npos) {
        pos += 8;
        const size_t end = reward_svg.find('"', pos);
        const std::string pts = reward_svg.substr(pos, end - pos);
        CHECK(std::count(pts.begin(), pts.end(), ',') == 5);
        ++polylines;
    }
    CHECK(polylines == 2);  // raw + moving average

    // moving-average series agrees with an offline recomputation
    const MetricsTable table = load_metrics_csv_file((dir / "metrics.csv").string());
    double window_sum = 0.0;
    for (size_t i = 0; i < table.rows.size(); ++i) {
        window_sum += table.rows[i].total_reward;  // window 50 > row count here
        const double recomputed = window_sum / static_cast<double>(i + 1);
        // column holds %.6g, so compare at that precision
        CHECK(table.rows[i].moving_avg_reward ==
              doctest::Approx(recomputed).epsilon(1e-5));
    }
}

TEST_CASE("emit_plots handles constant series and reports malformed rows") {
    const fs::path dir = test_dir("plots_edge");
    std::ofstream csv(dir / "metrics.csv");
    csv << kMetricsHeader << "\n";
    csv << "0,10,1,1,goal,0,0,0,0,0,0\n";
    csv << "1,10,1,1,goal,0,0,0,0,0,0\n";
    csv.close();
    const auto files = emit_plots((dir / "metrics.csv").string(), (dir / "charts").string());
    CHECK(files.size() == 5);
    const std::string svg = read_file(dir / "charts" / "reward.svg");
    CHECK(svg.find("NaN") == std::string::npos);
    CHECK(svg.find("nan") == std::string::npos);

    std::ofstream bad(dir / "bad.csv");
    bad << kMetricsHeader << "\n";
    bad << "0,10,1,1,goal,0,0,0,0,0,0\n";
    bad << "1,10,oops\n";
    bad.close();
    CHECK_THROWS_WITH_AS(emit_plots((dir / "bad.csv").string(), (dir / "charts2").string()),
                         doctest::Contains("row 3"), std::runtime_error);
}

TEST_CASE("moving average at early episodes uses all available episodes") {
    MovingAverage avg(3);
    avg.add(1.0);
    CHECK(avg.mean() == 1.0);
    avg.add(3.0);
    CHECK(avg.mean() == 2.0);
    avg.add(5.0);
    CHECK(avg.mean() == 3.0);
    avg.add(7.0);  // window slides
    CHECK(avg.mean() == 5.0);
}

TEST_CASE("random-zone curriculum and cli plot/eval wrappers run end to end") {
    const fs::path dir = test_dir("wobbles");
    const fs::path charts = test_dir("wobbles_charts");
    const fs::path eval_dir = test_dir("wobbles_eval");
    const fs::path cfg_path = dir / "run.cfg";
    {
        std::ofstream out(cfg_path);
        out << "arena builtin:wobbles\n"
               "algorithm dqn\n"
               "episodes 5\n"
               "seed 3\n"
               "obs_width 9\n"
               "obs_height 9\n"
               "conv 4 3 2\n"
               "dense 8\n"
               "dt 0.5\n"
               "base_steps 20\nsteps_per_episode 0\nstep_cap 20\n"
               "batch_size 4\ntrain_every 4\nwarmup 8\nbuffer_capacity 64\n"
               "eps_decay_steps 50\ncheckpoint_interval 0\n";
    }
    CHECK(run_cli({"train", "--config", cfg_path.string(), "--out", (dir / "out").string()}) == 0);
    const MetricsTable table = load_metrics_csv_file((dir / "out" / "metrics.csv").string());
    CHECK(table.rows.size() == 5);

    CHECK(run_cli({"plot", "--metrics", (dir / "out" / "metrics.csv").string(), "--out",
                   charts.string()}) == 0);
    CHECK(fs::exists(charts / "reward.svg"));
    CHECK(fs::exists(charts / "mean_abs_yaw_rate.svg"));

    CHECK(run_cli({"eval", "--model", (dir / "out" / "checkpoint_final.ckpt").string(), "--out",
                   eval_dir.string(), "--episodes", "2", "--arena", "builtin:wobbles-a"}) == 0);
    CHECK(load_metrics_csv_file((eval_dir / "metrics.csv").string()).rows.size() == 2);
}

TEST_CASE("lateral-roll action mode trains end to end") {
    const fs::path dir = test_dir("roll_mode");
    RunConfig cfg = parse_run_config(tiny_config_text("action_mode roll\nepisodes 4\n"));
    const TrainingReport report = train_run(cfg, dir.string());
    CHECK(report.episodes_run == 4);
    const MetricsTable table = load_metrics_csv_file((dir / "metrics.csv").string());
    for (const MetricsRow& row : table.rows) {
        CHECK(row.mean_abs_yaw_rate == 0.0);  // yaw never commanded in roll mode
        CHECK(row.steps > 0);
    }
}

TEST_CASE("non-finite loss aborts and saves the offending state") {
    const fs::path dir = test_dir("abort");
    RunConfig cfg = parse_run_config(tiny_config_text());
    train_run(cfg, dir.string());

    // Poison the final checkpoint's q1 weights with NaN and resume from it.
    const std::string path = (dir / "checkpoint_final.ckpt").string();
    CheckpointData data = load_checkpoint_file(path);
    for (TensorRecord& t : data.tensors)
        if (t.name == "q1.conv0.w")
            for (float& v : t.data) v = std::nanf("");
    save_checkpoint_file(path, data);

    RunConfig more = cfg;
    more.episodes = 6;
    const fs::path out = test_dir("abort_out");
    CHECK_THROWS_WITH_AS(train_run(more, out.string(), path), doctest::Contains("training aborted"),
                         std::runtime_error);
    CHECK(fs::exists(out / "checkpoint_abort.ckpt"));
}

TEST_CASE("DEEPROTOR_SEED overrides the config seed, explicit flag wins") {
    const fs::path dir1 = test_dir("envseed1");
    const fs::path dir2 = test_dir("envseed2");
    const fs::path cfg_path = dir1 / "run.cfg";
    {
        std::ofstream out(cfg_path);
        out << tiny_config_text("episodes 1\n");
    }
    setenv("DEEPROTOR_SEED", "123", 1);
    CHECK(run_cli({"train", "--config", cfg_path.string(), "--out", dir1.string()}) == 0);
    CHECK(read_file(dir1 / "config_echo.txt").find("seed 123\n") != std::string::npos);

    CHECK(run_cli({"train", "--config", cfg_path.string(), "--out", dir2.string(), "--seed", "7"}) == 0);
    CHECK(read_file(dir2 / "config_echo.txt").find("seed 7\n") != std::string::npos);
    unsetenv("DEEPROTOR_SEED");
}
