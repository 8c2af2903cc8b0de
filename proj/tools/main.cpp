// SPDX-License-Identifier: Apache-2.0
// Command-line front end: training, evaluation sweeps, constellation
// export, and the numeric gradient verification suite.
#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pilotlink/evaluate.hpp"
#include "pilotlink/trainer.hpp"

namespace {

struct EvalArgs {
    std::string out;
    std::string checkpoint;
    std::vector<std::string> schemes = {"practical", "perfect", "ML"};
    std::vector<int> mcs_list; // empty = all 15
    int bler_mcs = 2;
    double snr_min = 0.0, snr_max = 30.0, snr_step = 1.0;
    double target = 0.10;
    bool isotonic = false;
    pl::SweepConfig sweep;
};

pl::Scheme parse_scheme(const std::string& s) {
    if (s == "practical") return pl::Scheme::Practical;
    if (s == "perfect") return pl::Scheme::Perfect;
    if (s == "ML" || s == "ml") return pl::Scheme::ML;
    throw std::invalid_argument("unknown scheme '" + s + "' (practical, perfect, ML)");
}

std::vector<double> snr_grid(double lo, double hi, double step) {
    if (step <= 0.0) throw std::invalid_argument("snr-step must be positive");
    std::vector<double> grid;
    for (double v = lo; v <= hi + 1e-9; v += step) grid.push_back(v);
    if (grid.empty()) throw std::invalid_argument("empty SNR grid");
    return grid;
}

int cmd_train(const pl::TrainConfig& cfg, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    pl::TrainConfig run = cfg;
    run.history_path = out_dir + "/history.csv";
    pl::TrainResult res = pl::train_e2e(run);
    res.tx->save(out_dir + "/tx.bin");
    res.rx->save(out_dir + "/rx.bin");
    std::printf("trained %d steps, checkpoints and history in %s\n",
                static_cast<int>(res.history.size()), out_dir.c_str());
    if (!res.history.empty()) {
        const auto& last = res.history.back();
        std::printf("final loss %.6g bce %.6g dterm %.6g\n", last.loss, last.bce, last.dterm);
    }
    return 0;
}

int cmd_eval(const EvalArgs& args) {
    std::filesystem::create_directories(args.out);
    const std::vector<double> grid = snr_grid(args.snr_min, args.snr_max, args.snr_step);

    std::vector<pl::Scheme> schemes;
    for (const auto& s : args.schemes) schemes.push_back(parse_scheme(s));
    if (schemes.empty()) throw std::invalid_argument("no schemes requested");

    std::vector<int> mcs_list = args.mcs_list;
    if (mcs_list.empty())
        for (const auto& e : pl::mcs_table()) mcs_list.push_back(e.index);
    for (int m : mcs_list) pl::mcs_lookup(m); // validates range

    std::optional<pl::TxModel> tx;
    std::optional<pl::RxModel> rx;
    pl::SlotModels models;
    const bool wants_ml =
        std::find(schemes.begin(), schemes.end(), pl::Scheme::ML) != schemes.end();
    if (wants_ml) {
        if (args.checkpoint.empty())
            throw std::invalid_argument("ML scheme needs --checkpoint DIR with tx.bin/rx.bin");
        tx.emplace(pl::TxModel::load(args.checkpoint + "/tx.bin"));
        rx.emplace(pl::RxModel::load(args.checkpoint + "/rx.bin"));
        models.tx = &*tx;
        models.rx = &*rx;
    }

    std::vector<pl::BlerRow> all_rows;
    for (pl::Scheme scheme : schemes)
        for (int m : mcs_list) {
            if (scheme == pl::Scheme::ML && pl::mcs_lookup(m).qm != tx->config().qm) {
                std::fprintf(stderr, "[eval] skipping mcs %d for ML: checkpoint is %d bits/sym\n",
                             m, tx->config().qm);
                continue;
            }
            auto rows = pl::bler_sweep(scheme, m, grid, args.sweep, models);
            all_rows.insert(all_rows.end(), rows.begin(), rows.end());
            std::printf("swept %s mcs %d: %zu points\n", pl::scheme_name(scheme).c_str(), m,
                        rows.size());
        }

    pl::export_counts_csv(args.out + "/valid_blers_counts.csv", all_rows);
    std::vector<pl::BlerRow> fig_rows;
    for (const auto& r : all_rows)
        if (r.mcs == args.bler_mcs) fig_rows.push_back(r);
    pl::export_bler_csv(args.out + "/valid_blers.csv", fig_rows);

    // link adaptation needs the full MCS ladder per scheme
    bool full_ladder = mcs_list.size() == pl::mcs_table().size();
    if (wants_ml && full_ladder) {
        for (const auto& e : pl::mcs_table())
            if (e.qm != tx->config().qm) {
                full_ladder = false;
                break;
            }
    }
    if (full_ladder) {
        auto curve = pl::link_adapt(all_rows, args.sweep.geom, args.target, args.isotonic);
        pl::export_se_csv(args.out + "/link_adapt.csv", curve);
        std::vector<pl::SeRow> ml_curve, base_curve;
        for (const auto& r : curve) {
            if (r.scheme == pl::Scheme::ML) ml_curve.push_back(r);
            if (r.scheme == pl::Scheme::Practical) base_curve.push_back(r);
        }
        if (!ml_curve.empty() && !base_curve.empty())
            pl::export_gain_csv(args.out + "/gain.csv", pl::se_gain(ml_curve, base_curve));
    } else {
        std::fprintf(stderr,
                     "[eval] link adaptation skipped: sweep does not cover the full MCS table\n");
    }
    std::printf("evaluation CSVs in %s\n", args.out.c_str());
    return 0;
}

int cmd_export(const std::string& checkpoint, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    pl::TxModel tx = pl::TxModel::load(checkpoint + "/tx.bin");
    pl::export_constellation_csv(tx, out_dir);
    std::printf("constellation CSVs for %d streams in %s\n", tx.config().n_streams,
                out_dir.c_str());
    return 0;
}

int cmd_gradcheck(int points, std::uint64_t seed) {
    const auto items = pl::gradient_suite(points, seed);
    double worst = 0.0;
    for (const auto& it : items) {
        std::printf("%-26s %.3g\n", it.name.c_str(), it.rel_err);
        worst = std::max(worst, it.rel_err);
    }
    std::printf("worst relative error %.3g (threshold 1e-4)\n", worst);
    return worst < 1e-4 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"pilotless spatial multiplexing link: training and evaluation"};
    app.require_subcommand(1);
    app.set_config("--config", "", "read options from a key = value file with [section] headers");
    app.allow_config_extras(false);
    app.option_defaults()->always_capture_default();

    pl::TrainConfig tcfg;
    std::string train_out = "out";
    auto* train = app.add_subcommand("train", "train constellations and receiver end to end");
    train->add_option("--out", train_out, "output directory")->envname("PILOTLINK_OUT");
    train->add_option("--qm", tcfg.qm, "bits per symbol (4 or 6)");
    train->add_option("--lambda", tcfg.lambda, "distance penalty weight (negative = per-qm default)");
    train->add_option("--b", tcfg.bias, "distance penalty bias (negative = per-qm default)");
    train->add_option("--lr", tcfg.lr, "Adam learning rate");
    train->add_option("--batch", tcfg.batch, "slots per step");
    train->add_option("--steps", tcfg.steps, "training steps");
    train->add_option("--snr-min", tcfg.snr_min_db, "training SNR draw lower edge, dB");
    train->add_option("--snr-max", tcfg.snr_max_db, "training SNR draw upper edge, dB");
    train->add_option("--delay-min", tcfg.delay_min_s, "delay spread draw lower edge, s");
    train->add_option("--delay-max", tcfg.delay_max_s, "delay spread draw upper edge, s");
    train->add_option("--vel-min", tcfg.vel_min_mps, "velocity draw lower edge, m/s");
    train->add_option("--vel-max", tcfg.vel_max_mps, "velocity draw upper edge, m/s");
    train->add_option("--taps", tcfg.taps, "channel taps");
    train->add_option("--clip-norm", tcfg.clip_norm, "gradient clipping norm");
    train->add_option("--seed", tcfg.seed, "master seed");
    train->add_option("--nf", tcfg.geom.nf, "subcarriers");
    train->add_option("--ns", tcfg.geom.ns, "symbols per slot");
    train->add_option("--nt", tcfg.geom.nt, "transmit streams");
    train->add_option("--nr", tcfg.geom.nr, "receive antennas");
    train->add_option("--rx-blocks", tcfg.rx_blocks, "receiver residual blocks");
    train->add_option("--rx-filters", tcfg.rx_filters, "receiver conv filters");
    train->add_option("--rx-features", tcfg.rx_in_features, "receiver input mix channels");

    EvalArgs ecfg;
    auto* eval = app.add_subcommand("eval", "BLER sweeps, link adaptation, CSV export");
    eval->add_option("--out", ecfg.out, "output directory")
        ->envname("PILOTLINK_OUT")
        ->default_val("out");
    eval->add_option("--checkpoint", ecfg.checkpoint, "directory with tx.bin/rx.bin");
    eval->add_option("--schemes", ecfg.schemes, "schemes to sweep")->delimiter(',');
    eval->add_option("--mcs", ecfg.mcs_list, "MCS subset (default: all 15)")->delimiter(',');
    eval->add_option("--bler-mcs", ecfg.bler_mcs, "MCS shown in valid_blers.csv");
    eval->add_option("--snr-min", ecfg.snr_min, "sweep SNR start, dB");
    eval->add_option("--snr-max", ecfg.snr_max, "sweep SNR end, dB");
    eval->add_option("--snr-step", ecfg.snr_step, "sweep SNR step, dB");
    eval->add_option("--target", ecfg.target, "link adaptation BLER target");
    eval->add_flag("--isotonic", ecfg.isotonic, "force SE non-decreasing in SNR");
    eval->add_option("--min-errors", ecfg.sweep.stop.min_errors, "stop after this many block errors");
    eval->add_option("--min-blocks", ecfg.sweep.stop.min_blocks, "simulate at least this many blocks");
    eval->add_option("--max-blocks", ecfg.sweep.stop.max_blocks, "hard block cap per point");
    eval->add_option("--kbest-k", ecfg.sweep.kbest_k, "K-Best list size");
    eval->add_option("--taps", ecfg.sweep.taps, "channel taps");
    eval->add_option("--delay-min", ecfg.sweep.delay_min_s, "delay spread draw lower edge, s");
    eval->add_option("--delay-max", ecfg.sweep.delay_max_s, "delay spread draw upper edge, s");
    eval->add_option("--vel-min", ecfg.sweep.vel_min_mps, "velocity draw lower edge, m/s");
    eval->add_option("--vel-max", ecfg.sweep.vel_max_mps, "velocity draw upper edge, m/s");
    eval->add_option("--seed", ecfg.sweep.seed, "master seed");
    eval->add_option("--jobs", ecfg.sweep.jobs, "worker threads for sweeps");
    eval->add_option("--nf", ecfg.sweep.geom.nf, "subcarriers");
    eval->add_option("--ns", ecfg.sweep.geom.ns, "symbols per slot");
    eval->add_option("--nt", ecfg.sweep.geom.nt, "transmit streams");
    eval->add_option("--nr", ecfg.sweep.geom.nr, "receive antennas");

    std::string exp_checkpoint, exp_out = "out";
    auto* exp = app.add_subcommand("export-constellation", "write learned points per stream");
    exp->add_option("--checkpoint", exp_checkpoint, "directory with tx.bin")->required();
    exp->add_option("--out", exp_out, "output directory")->envname("PILOTLINK_OUT");

    int gc_points = 20;
    std::uint64_t gc_seed = 2026;
    auto* gc = app.add_subcommand("gradcheck", "finite-difference gradient verification");
    gc->add_option("--points", gc_points, "composite loss parameter points");
    gc->add_option("--seed", gc_seed, "suite seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*train) return cmd_train(tcfg, train_out);
        if (*eval) return cmd_eval(ecfg);
        if (*exp) return cmd_export(exp_checkpoint, exp_out);
        if (*gc) return cmd_gradcheck(gc_points, gc_seed);
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
