#pragma once

#include <cmath>
#include <exception>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "modecon/modecon.hpp"

namespace modecon::cli {

struct DataOptions {
    std::string csv;
    std::string idx_images;
    std::string idx_labels;
    std::string synthetic;  // teacher | blobs
    std::size_t teacher_width = 4;
    std::size_t input_dim = 8;
    std::size_t samples = 1000;
    std::uint64_t data_seed = 7;
    std::size_t classes = 0;

    void add_to(CLI::App* app) {
        app->add_option("--data", csv, "dataset CSV (x1..xn then y1..ym, or a label column)");
        app->add_option("--idx-images", idx_images, "IDX image file");
        app->add_option("--idx-labels", idx_labels, "IDX label file");
        app->add_option("--synthetic", synthetic, "generate data instead: teacher or blobs")
            ->check(CLI::IsMember({"teacher", "blobs"}));
        app->add_option("--teacher-width", teacher_width, "synthetic teacher hidden width");
        app->add_option("--input-dim", input_dim, "synthetic input dimension");
        app->add_option("--samples", samples, "synthetic sample count");
        app->add_option("--data-seed", data_seed, "synthetic data seed");
        app->add_option("--classes", classes, "class count for labelled data (0 infers)");
    }

    LabeledDataset load() const {
        const int sources = !csv.empty() + !idx_images.empty() + !synthetic.empty();
        if (sources != 1) throw ValidationError("give exactly one of --data, --idx-images/--idx-labels, --synthetic");
        if (!csv.empty()) return read_dataset_csv(csv, classes);
        if (!idx_images.empty()) {
            if (idx_labels.empty()) throw ValidationError("--idx-images needs --idx-labels");
            return load_idx(idx_images, idx_labels, classes == 0 ? 10 : classes);
        }
        if (synthetic == "teacher") return make_teacher_student_data(teacher_width, input_dim, samples, data_seed).data;
        return make_two_blobs(samples, input_dim, 2.0, data_seed);
    }

    json echo() const {
        return {{"csv", csv}, {"idx_images", idx_images}, {"idx_labels", idx_labels}, {"synthetic", synthetic},
                {"teacher_width", teacher_width}, {"input_dim", input_dim}, {"samples", samples},
                {"data_seed", data_seed}};
    }
};

inline std::vector<std::size_t> parse_size_list(const std::string& s, const std::string& flag) {
    std::vector<std::size_t> out;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        std::size_t used = 0;
        long long v = 0;
        try {
            v = std::stoll(cell, &used);
        } catch (const std::exception&) {
            throw ValidationError(flag + ": '" + cell + "' is not an integer");
        }
        if (used != cell.size() || v <= 0) throw ValidationError(flag + ": entries must be positive integers");
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

inline std::vector<double> parse_double_list(const std::string& s, const std::string& flag) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        std::size_t used = 0;
        try {
            out.push_back(std::stod(cell, &used));
        } catch (const std::exception&) {
            throw ValidationError(flag + ": '" + cell + "' is not a number");
        }
        if (used != cell.size()) throw ValidationError(flag + ": '" + cell + "' is not a number");
    }
    return out;
}

inline void emit(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty() || path == "-") out << text;
    else write_text_file(path, text);
}

struct TrainArgs {
    DataOptions data;
    std::string dims;
    std::string loss = "squared";
    double lr = 0.1;
    double decay = 1e-6;
    std::size_t batch = 64;
    std::size_t iterations = 5000;
    std::string dropout = "0";
    double momentum = 0.0;
    std::uint64_t seed = 0;
    std::string out;
    std::string history;
};

inline TrainConfig make_config(const TrainArgs& a, const LabeledDataset& d) {
    TrainConfig cfg;
    cfg.dims = parse_size_list(a.dims, "--dims");
    if (cfg.dims.size() < 3) throw ValidationError("--dims needs at least three entries (input,hidden...,output)");
    if (cfg.dims.front() != d.input_dim())
        throw ValidationError("--dims input " + std::to_string(cfg.dims.front()) + " differs from data dimension " +
                              std::to_string(d.input_dim()));
    if (cfg.dims.back() != d.target_dim())
        throw ValidationError("--dims output " + std::to_string(cfg.dims.back()) + " differs from target dimension " +
                              std::to_string(d.target_dim()));
    cfg.lr = a.lr;
    cfg.decay = a.decay;
    cfg.batch = a.batch;
    cfg.iterations = a.iterations;
    cfg.dropout = parse_double_list(a.dropout, "--dropout-p");
    cfg.momentum = a.momentum;
    cfg.seed = a.seed;
    cfg.kind = loss_kind_from_string(a.loss);
    cfg.validate();
    return cfg;
}

inline json config_echo(const TrainConfig& c) {
    return {{"dims", c.dims}, {"lr", c.lr}, {"decay", c.decay}, {"batch", c.batch}, {"iterations", c.iterations},
            {"dropout", c.dropout}, {"momentum", c.momentum}, {"seed", c.seed}, {"loss", to_string(c.kind)}};
}

inline json loss_json(const LossResult& r) {
    json j{{"loss", r.value}};
    if (r.accuracy) j["accuracy"] = *r.accuracy;
    return j;
}

inline int cmd_train(const TrainArgs& a, std::ostream& out) {
    const LabeledDataset data = a.data.load();
    const TrainConfig cfg = make_config(a, data);
    if (a.out.empty()) throw ValidationError("--out is required");
    const TrainResult res = sgd_train(cfg, data);
    save_network(res.net, a.out);
    if (!a.history.empty()) {
        std::ostringstream os;
        os << "step,loss\n";
        for (std::size_t k = 0; k < res.history.size(); ++k) os << k << ',' << format_double(res.history[k]) << '\n';
        write_text_file(a.history, os.str());
    }
    json summary{{"experiment", "train"}, {"config", config_echo(cfg)}, {"data", a.data.echo()},
                 {"final", loss_json(loss(res.net, data, cfg.kind))}, {"model", a.out}};
    out << summary.dump(2) << '\n';
    return 0;
}

struct SweepArgs {
    DataOptions data;
    std::string model;
    std::string loss = "squared";
    std::string p_list;
    std::size_t trials = 20;
    std::size_t repeats = 1;
    std::uint64_t seed = 0;
    std::string out;
    std::string summary;
};

// keep_units reports floor(h(1-p)) for the narrowest hidden layer.
inline int cmd_sweep_dropout(const SweepArgs& a, std::ostream& out) {
    const auto ps = parse_double_list(a.p_list, "--p-list");
    if (ps.empty()) throw ValidationError("--p-list must name at least one probability");
    if (a.repeats < 1) throw ValidationError("--repeats must be at least 1");
    const Network net = load_network(a.model);
    const LabeledDataset data = a.data.load();
    const LossKind kind = loss_kind_from_string(a.loss);
    std::ostringstream csv;
    csv << "p,keep_units,best_loss,best_acc\n";
    json rows = json::array();
    for (std::size_t q = 0; q < ps.size(); ++q) {
        const double p = ps[q];
        std::vector<double> losses, accs;
        for (std::size_t r = 0; r < a.repeats; ++r) {
            const StabilityGap g = dropout_stability_search(net, data, kind, p, a.trials, derive_seed(a.seed, q * 1000 + r));
            losses.push_back(g.best_masked_loss);
            if (g.best_accuracy) accs.push_back(*g.best_accuracy);
        }
        auto mean = [](const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); };
        auto sd = [&](const std::vector<double>& v) {
            const double m = mean(v);
            double s = 0.0;
            for (double x : v) s += (x - m) * (x - m);
            return v.size() > 1 ? std::sqrt(s / static_cast<double>(v.size() - 1)) : 0.0;
        };
        const std::size_t keep = keep_count(net.min_hidden_width(), p);
        csv << format_double(p) << ',' << keep << ',' << format_double(mean(losses)) << ',';
        if (!accs.empty()) csv << format_double(mean(accs));
        csv << '\n';
        json row{{"p", p}, {"keep_units", keep}, {"best_loss", mean(losses)}, {"best_loss_std", sd(losses)}};
        if (!accs.empty()) {
            row["best_acc"] = mean(accs);
            row["best_acc_std"] = sd(accs);
        }
        rows.push_back(row);
    }
    emit(a.out, csv.str(), out);
    if (!a.summary.empty()) {
        json s{{"experiment", "sweep-dropout"}, {"model", a.model}, {"data", a.data.echo()}, {"trials", a.trials},
               {"repeats", a.repeats}, {"seed", a.seed}, {"base", loss_json(loss(net, data, kind))}, {"rows", rows}};
        write_text_file(a.summary, s.dump(2) + "\n");
    }
    return 0;
}

struct ConnectArgs {
    DataOptions data;
    std::string model_a;
    std::string model_b;
    std::string teacher;
    std::string method = "thm31";
    std::string loss = "squared";
    std::optional<double> dropout_p;
    std::size_t trials = 20;
    std::size_t grid = 8;
    std::uint64_t seed = 0;
    std::string out;
    std::string summary;
};

inline int cmd_connect(const ConnectArgs& a, std::ostream& out) {
    const Network netA = load_network(a.model_a);
    const Network netB = load_network(a.model_b);
    if (!netA.same_shape(netB)) throw DimensionError("models have different architectures");
    const LabeledDataset data = a.data.load();
    const LossKind kind = loss_kind_from_string(a.loss);
    check_compatible(netA, data, kind);
    json s{{"experiment", "connect"}, {"method", a.method}, {"model_a", a.model_a}, {"model_b", a.model_b},
           {"data", a.data.echo()}, {"seed", a.seed}, {"segments_grid", a.grid}, {"loss_kind", to_string(kind)}};

    PiecewisePath path;
    if (netA == netB) {
        // Identical endpoints: the constant path is optimal for every method.
        path = PiecewisePath::starting_at(netA);
        s["identical_endpoints"] = true;
    } else if (a.method == "linear") {
        path = linear_path(netA, netB);
    } else if (a.method == "thm31") {
        const double p = a.dropout_p.value_or(0.5);
        const StabilityGap ga = dropout_stability_search(netA, data, kind, p, a.trials, derive_seed(a.seed, 1));
        const StabilityGap gb = dropout_stability_search(netB, data, kind, p, a.trials, derive_seed(a.seed, 2));
        path = theorem31_path(netA, ga.mask, netB, gb.mask);
        s["dropout_p"] = p;
        s["trials"] = a.trials;
        s["gap_a"] = ga.gap;
        s["gap_b"] = gb.gap;
        s["max_gap"] = std::max(ga.gap, gb.gap);
        // Intermediate points of each dropout leg realize the suffix-masked networks, so the barrier
        // is bounded by the larger suffix gap.
        const double sa = suffix_gap(netA, data, kind, ga.mask), sb = suffix_gap(netB, data, kind, gb.mask);
        s["suffix_gap_a"] = sa;
        s["suffix_gap_b"] = sb;
        s["max_suffix_gap"] = std::max(sa, sb);
    } else if (a.method == "thm41") {
        const double p = a.dropout_p.value_or(0.75);
        DropoutRetry retry;
        retry.data = &data;
        retry.kind = kind;
        path = theorem41_path(netA, netB, p, derive_seed(a.seed, 1), derive_seed(a.seed, 2), retry);
        s["dropout_p"] = p;
    } else if (a.method == "teacher_student") {
        if (a.teacher.empty()) throw ValidationError("teacher_student needs --teacher");
        const Network star = load_network(a.teacher);
        const double p = a.dropout_p.value_or(0.75);
        DropoutRetry retry;
        retry.data = &data;
        retry.kind = kind;
        const TeacherStudentParts parts =
            teacher_student_parts(netA, netB, star, p, derive_seed(a.seed, 1), derive_seed(a.seed, 2), retry);
        path = parts.path;
        s["dropout_p"] = p;
        s["teacher"] = a.teacher;
        s["teacher_loss"] = loss(star, data, kind).value;
        s["drop_penalty_a"] = parts.drop_a.penalty.value_or(0.0);
        s["drop_penalty_b"] = parts.drop_b.penalty.value_or(0.0);
        s["warnings"] = parts.drop_a.warnings;
    } else {
        throw ValidationError("unknown method '" + a.method + "'");
    }
    const PathProfile prof = eval_path(path, data, kind, a.grid);
    emit(a.out, profile_csv(prof), out);
    s["segments"] = path.segments();
    json labels = json::array();
    for (SegmentKind k : path.labels) labels.push_back(to_string(k));
    s["segment_kinds"] = labels;
    s["start_loss"] = prof.start_loss();
    s["end_loss"] = prof.end_loss();
    s["max_loss"] = prof.max_loss;
    s["barrier"] = prof.barrier;
    if (!a.summary.empty()) write_text_file(a.summary, s.dump(2) + "\n");
    else if (!a.out.empty() && a.out != "-") out << s.dump(2) << '\n';
    return 0;
}

struct StabilityArgs {
    DataOptions data;
    std::string model;
    std::string loss = "squared";
    double p = 0.5;
    std::size_t mask_samples = 8;
    std::size_t t_grid = 11;
    std::size_t max_samples = 1024;
    std::size_t smoothness_samples = 128;
    std::optional<double> beta;
    std::uint64_t seed = 0;
    std::string out_dir;
};

inline int cmd_stability(const StabilityArgs& a, std::ostream& out) {
    const Network net = load_network(a.model);
    const LabeledDataset data = a.data.load();
    StabilityOptions opt;
    opt.p = a.p;
    opt.mask_samples = a.mask_samples;
    opt.t_grid = a.t_grid;
    opt.seed = a.seed;
    opt.max_samples = a.max_samples;
    opt.smoothness_samples = a.smoothness_samples;
    opt.beta = a.beta;
    const StabilityReport rep = measure_stability(net, data, loss_kind_from_string(a.loss), opt);
    if (!a.out_dir.empty()) write_stability(rep, a.out_dir);
    json j = to_json(rep);
    j["experiment"] = "stability";
    j["config"] = {{"model", a.model}, {"data", a.data.echo()}, {"dropout_p", a.p}, {"mask_samples", a.mask_samples},
                   {"t_grid", a.t_grid}, {"max_samples", a.max_samples},
                   {"smoothness_samples", a.smoothness_samples}, {"seed", a.seed}};
    out << j.dump(2) << '\n';
    return 0;
}

struct CounterexampleArgs {
    CounterexampleSpec spec;
    std::size_t grid = 20;
    std::size_t restarts = 10000;
    std::size_t probe_iterations = 300;
    std::uint64_t seed = 0;
    std::string out_data;
    std::string out_profile;
};

inline int cmd_counterexample(const CounterexampleArgs& a, std::ostream& out) {
    const CounterexampleSpec& s = a.spec;
    const LabeledDataset data = build_counterexample_dataset(s);
    const auto [netA, netB] = build_counterexample_minima(s);
    bool identity_two = true, identity_sum = true;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& x = data.inputs[i];
        const double y = data.targets[i][0];
        double sum = 0.0;
        for (std::size_t j = 2; j < x.size(); ++j) sum += std::max(x[j], 0.0);
        identity_two = identity_two && std::max(x[0], 0.0) - std::max(x[1], 0.0) == y;
        identity_sum = identity_sum && sum == y;
    }
    const PathProfile prof = probe_counterexample_barrier(s, a.grid);
    const double midpoint = loss(lerp(netA, netB, 0.5), data, LossKind::squared).value;
    PositiveProbeOptions po;
    po.restarts = a.restarts;
    po.iterations = a.probe_iterations;
    po.seed = a.seed;
    const PositiveProbeResult probe = probe_positive_weight_floor(s, po);
    if (!a.out_data.empty()) write_text_file(a.out_data, dataset_csv(data));
    if (!a.out_profile.empty()) write_text_file(a.out_profile, profile_csv(prof));
    json j{{"experiment", "counterexample"},
           {"config", {{"h", s.h}, {"k", s.k}, {"l", s.l}, {"m", s.m}, {"n", s.n}, {"grid", a.grid}, {"seed", a.seed}}},
           {"loss_a", loss(netA, data, LossKind::squared).value},
           {"loss_b", loss(netB, data, LossKind::squared).value},
           {"identity_f1_minus_f2", identity_two},
           {"identity_sum_f3_to_last", identity_sum},
           {"linear_midpoint_loss", midpoint},
           {"linear_max_loss", prof.max_loss},
           {"linear_barrier", prof.barrier},
           {"positive_weight_probe",
            {{"kind", "evidence, not proof"},
             {"restarts", probe.restarts},
             {"iterations", a.probe_iterations},
             {"floor", number_or_null(probe.floor)},
             {"best_restart", probe.best_restart}}}};
    out << j.dump(2) << '\n';
    return 0;
}

struct NarrowArgs {
    TrainArgs train;
    std::size_t max_width = 8;
    std::size_t depth = 3;
    std::string out;
};

inline int cmd_narrow_sweep(const NarrowArgs& a, std::ostream& out) {
    if (a.max_width < 1) throw ValidationError("--max-width must be at least 1");
    if (a.depth < 2) throw ValidationError("--depth must be at least 2");
    const LabeledDataset data = a.train.data.load();
    std::ostringstream csv;
    csv << "width,final_loss\n";
    for (std::size_t w = 1; w <= a.max_width; ++w) {
        TrainArgs t = a.train;
        std::string dims = std::to_string(data.input_dim());
        for (std::size_t i = 1; i < a.depth; ++i) dims += "," + std::to_string(w);
        t.dims = dims + "," + std::to_string(data.target_dim());
        const TrainConfig cfg = make_config(t, data);
        const TrainResult res = sgd_train(cfg, data);
        csv << w << ',' << format_double(loss(res.net, data, cfg.kind).value) << '\n';
    }
    emit(a.out, csv.str(), out);
    return 0;
}

inline void add_train_options(CLI::App* c, TrainArgs& a, bool with_dims) {
    a.data.add_to(c);
    if (with_dims) c->add_option("--dims", a.dims, "layer widths, e.g. 8,64,64,1")->required();
    c->add_option("--loss", a.loss, "squared or softmax_ce");
    c->add_option("--lr", a.lr, "initial learning rate");
    c->add_option("--decay", a.decay, "per-step multiplicative learning-rate decay");
    c->add_option("--batch", a.batch, "batch size");
    c->add_option("--iterations", a.iterations, "SGD steps");
    c->add_option("--dropout-p", a.dropout, "dropout probability, one value or one per hidden layer");
    c->add_option("--momentum", a.momentum, "momentum");
    c->add_option("--seed", a.seed, "seed");
}

// Exit codes: 0 success, 1 usage or validation error, 2 runtime or numeric failure.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Mode connectivity experiments for bias-free ReLU networks"};
    app.require_subcommand(1);

    TrainArgs train;
    auto* c_train = app.add_subcommand("train", "train a network with SGD and write model JSON");
    add_train_options(c_train, train, true);
    c_train->add_option("--out", train.out, "model JSON path")->required();
    c_train->add_option("--history", train.history, "per-step loss CSV");

    SweepArgs sweep;
    auto* c_sweep = app.add_subcommand("sweep-dropout", "best-of-N dropout loss for each p");
    sweep.data.add_to(c_sweep);
    c_sweep->add_option("--model", sweep.model, "model JSON")->required();
    c_sweep->add_option("--loss", sweep.loss, "squared or softmax_ce");
    c_sweep->add_option("--p-list", sweep.p_list, "comma-separated dropout probabilities")->required();
    c_sweep->add_option("--trials", sweep.trials, "masks sampled per p");
    c_sweep->add_option("--repeats", sweep.repeats, "repetitions averaged per p");
    c_sweep->add_option("--seed", sweep.seed, "seed");
    c_sweep->add_option("--out", sweep.out, "CSV path (default stdout)");
    c_sweep->add_option("--summary", sweep.summary, "summary JSON path");

    ConnectArgs conn;
    auto* c_conn = app.add_subcommand("connect", "build a path between two models and evaluate it");
    conn.data.add_to(c_conn);
    c_conn->add_option("--model-a", conn.model_a, "first model JSON")->required();
    c_conn->add_option("--model-b", conn.model_b, "second model JSON")->required();
    c_conn->add_option("--method", conn.method, "thm31, thm41, teacher_student or linear")
        ->check(CLI::IsMember({"thm31", "thm41", "teacher_student", "linear"}));
    c_conn->add_option("--teacher", conn.teacher, "narrow model JSON for teacher_student");
    c_conn->add_option("--loss", conn.loss, "squared or softmax_ce");
    c_conn->add_option("--dropout-p", conn.dropout_p, "dropout probability");
    c_conn->add_option("--trials", conn.trials, "masks sampled per network (thm31)");
    c_conn->add_option("--segments-grid", conn.grid, "evaluation points per segment");
    c_conn->add_option("--seed", conn.seed, "seed");
    c_conn->add_option("--out", conn.out, "profile CSV path (default stdout)");
    c_conn->add_option("--summary", conn.summary, "summary JSON path");

    StabilityArgs stab;
    auto* c_stab = app.add_subcommand("stability", "noise stability report");
    stab.data.add_to(c_stab);
    c_stab->add_option("--model", stab.model, "model JSON")->required();
    c_stab->add_option("--loss", stab.loss, "squared or softmax_ce");
    c_stab->add_option("--dropout-p", stab.p, "dropout probability for the smoothness probe");
    c_stab->add_option("--mask-samples", stab.mask_samples, "dropout realizations for smoothness (0 skips)");
    c_stab->add_option("--t-grid", stab.t_grid, "interpolation grid points");
    c_stab->add_option("--max-samples", stab.max_samples, "samples used for cushions and contraction");
    c_stab->add_option("--smoothness-samples", stab.smoothness_samples, "samples used for smoothness");
    c_stab->add_option("--beta", stab.beta, "loss Lipschitz constant");
    c_stab->add_option("--seed", stab.seed, "seed");
    c_stab->add_option("--out-dir", stab.out_dir, "directory for report.json and histogram CSVs");

    CounterexampleArgs ce;
    auto* c_ce = app.add_subcommand("counterexample", "dataset with disconnected global minima");
    c_ce->set_help_flag("--help", "print help for counterexample");
    c_ce->add_option("--h", ce.spec.h, "student hidden width");
    c_ce->add_option("--k", ce.spec.k, "block boundary k");
    c_ce->add_option("--l", ce.spec.l, "block boundary l");
    c_ce->add_option("--m", ce.spec.m, "block boundary m");
    c_ce->add_option("--n", ce.spec.n, "sample count n");
    c_ce->add_option("--segments-grid", ce.grid, "evaluation points on the linear path");
    c_ce->add_option("--restarts", ce.restarts, "restarts of the positive-weight probe");
    c_ce->add_option("--probe-iterations", ce.probe_iterations, "gradient steps per restart");
    c_ce->add_option("--seed", ce.seed, "seed");
    c_ce->add_option("--out-data", ce.out_data, "dataset CSV path");
    c_ce->add_option("--out-profile", ce.out_profile, "linear path profile CSV path");

    NarrowArgs narrow;
    auto* c_narrow = app.add_subcommand("narrow-sweep", "train widths 1..W and report final loss");
    add_train_options(c_narrow, narrow.train, false);
    c_narrow->add_option("--max-width", narrow.max_width, "largest hidden width");
    c_narrow->add_option("--depth", narrow.depth, "network depth");
    c_narrow->add_option("--out", narrow.out, "CSV path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e, out, err);
        err << "usage error: " << e.what() << '\n';
        return 1;
    }

    try {
        if (c_train->parsed()) return cmd_train(train, out);
        if (c_sweep->parsed()) return cmd_sweep_dropout(sweep, out);
        if (c_conn->parsed()) return cmd_connect(conn, out);
        if (c_stab->parsed()) return cmd_stability(stab, out);
        if (c_ce->parsed()) return cmd_counterexample(ce, out);
        if (c_narrow->parsed()) return cmd_narrow_sweep(narrow, out);
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}

}  // namespace modecon::cli
