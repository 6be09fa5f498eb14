// Command-line front end: train / eval / corrupt / augment / map-decisions /
// plot. Every run is driven by a merged key=value config (file values, then
// flag overrides); the effective config is written into the output directory
// so a run can be reproduced from its artifacts alone.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lpnet/lpnet.hpp"

namespace fs = std::filesystem;

namespace {

using namespace lpnet;

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    a ^= b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2);
    return a;
}

// ---------------------------------------------------------------------------
// config plumbing

/// Flag values land in `pending` during parsing; after parsing, values the
/// user actually passed override the config file.
struct Override {
    std::string key;
    CLI::Option* opt = nullptr;
    std::string* value = nullptr;
};

struct ConfigBinder {
    std::string config_path;
    std::vector<Override> overrides;
    std::vector<std::unique_ptr<std::string>> storage;

    void bind_config_flag(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "config file (key=value with [sections])");
    }

    CLI::Option* add(CLI::App* cmd, const std::string& flag, const std::string& key,
                     const std::string& help) {
        storage.push_back(std::make_unique<std::string>());
        CLI::Option* opt = cmd->add_option(flag, *storage.back(), help);
        overrides.push_back({key, opt, storage.back().get()});
        return opt;
    }

    CLI::Option* add_flag(CLI::App* cmd, const std::string& flag, const std::string& key,
                          const std::string& help) {
        storage.push_back(std::make_unique<std::string>());
        std::string* slot = storage.back().get();
        CLI::Option* opt = cmd->add_flag_callback(
            flag, [slot] { *slot = "true"; }, help);
        overrides.push_back({key, opt, slot});
        return opt;
    }

    Config merged() const {
        Config cfg = config_path.empty() ? Config() : Config::load(config_path);
        for (const Override& o : overrides)
            if (o.opt->count() > 0) cfg.set(o.key, *o.value);
        return cfg;
    }
};

// ---------------------------------------------------------------------------
// shared pieces

std::string data_root(const Config& cfg) {
    if (const auto v = cfg.get("data.root")) return *v;
    if (const char* env = std::getenv("LPNET_DATA")) return env;
    return "data";
}

struct Splits {
    Dataset train, test;
};

Splits load_data(const Config& cfg) {
    const std::string name = cfg.get_or("data.set", "synth");
    Splits s;
    if (name == "mnist") {
        Mnist m = load_mnist((fs::path(data_root(cfg)) / "mnist").string());
        s.train = std::move(m.train);
        s.test = std::move(m.test);
    } else if (name == "cifar10") {
        Cifar10 c = load_cifar10((fs::path(data_root(cfg)) / "cifar10").string());
        s.train = std::move(c.train);
        s.test = std::move(c.test);
    } else if (name == "synth") {
        Mnist m = make_synth_mnist(
            static_cast<std::size_t>(cfg.integer_or("data.synth_train", 12000)),
            static_cast<std::size_t>(cfg.integer_or("data.synth_test", 2000)),
            static_cast<std::uint64_t>(cfg.integer_or("data.synth_seed", 77)));
        s.train = std::move(m.train);
        s.test = std::move(m.test);
    } else {
        throw Error(ErrorKind::usage, "unknown dataset '" + name +
                                          "' (expected mnist, cifar10, or synth)");
    }
    s.train = subset(s.train, static_cast<std::size_t>(cfg.integer_or("data.train_limit", 0)));
    s.test = subset(s.test, static_cast<std::size_t>(cfg.integer_or("data.test_limit", 0)));
    return s;
}

ActivationSpec af_from_config(const Config& cfg) {
    ActivationSpec spec = af_init(af_kind_from_name(cfg.get_or("af.kind", "relu")));
    const std::string params = cfg.get_or("af.params", "");
    std::size_t start = 0;
    while (start < params.size()) {
        std::size_t comma = params.find(',', start);
        if (comma == std::string::npos) comma = params.size();
        const std::string field = params.substr(start, comma - start);
        start = comma + 1;
        if (field.empty()) continue;
        const std::size_t eq = field.find('=');
        check(eq != std::string::npos, ErrorKind::usage,
              "af.params: expected k=v, got '" + field + "'");
        const std::string key = field.substr(0, eq);
        double value = 0.0;
        try {
            value = std::stod(field.substr(eq + 1));
        } catch (const std::exception&) {
            throw Error(ErrorKind::usage, "af.params: '" + field + "' is not numeric");
        }
        bool known = false;
        for (AfParam p : {AfParam::A, AfParam::B, AfParam::alpha, AfParam::beta,
                          AfParam::delta})
            if (key == af_param_name(p)) {
                spec.set_param(p, value);
                known = true;
            }
        check(known, ErrorKind::usage, "af.params: unknown parameter '" + key + "'");
    }
    af_validate(spec);
    return spec;
}

std::vector<ScheduleEntry> schedule_from_config(const Config& cfg,
                                                std::vector<ScheduleEntry> fallback) {
    const auto text = cfg.get("train.schedule");
    if (!text) return fallback;
    std::vector<ScheduleEntry> entries;
    std::size_t start = 0;
    while (start < text->size()) {
        std::size_t comma = text->find(',', start);
        if (comma == std::string::npos) comma = text->size();
        const std::string field = text->substr(start, comma - start);
        start = comma + 1;
        if (field.empty()) continue;
        const std::size_t colon = field.find(':');
        check(colon != std::string::npos, ErrorKind::usage,
              "train.schedule: expected epoch:factor, got '" + field + "'");
        try {
            entries.push_back({static_cast<std::size_t>(std::stoull(field.substr(0, colon))),
                               std::stod(field.substr(colon + 1))});
        } catch (const std::exception&) {
            throw Error(ErrorKind::usage, "train.schedule: '" + field + "' is not numeric");
        }
    }
    return entries;
}

SeverityTable table_from_config(const Config& cfg) {
    if (const auto path = cfg.get("eval.severity_conf")) return load_severity_table(*path);
    return SeverityTable::defaults();
}

void write_effective_config(const Config& cfg, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    cfg.save((out_dir / "config.conf").string());
}

Tensor image_at(const Tensor& images, std::size_t i) {
    const std::size_t per = images.numel() / images.dim(0);
    Tensor img({images.dim(1), images.dim(2), images.dim(3)});
    std::copy(images.data.begin() + i * per, images.data.begin() + (i + 1) * per,
              img.data.begin());
    return img;
}

Tensor corrupt_set(const Tensor& images, CorruptionKind kind, int severity,
                   std::uint64_t seed, const SeverityTable& table) {
    Tensor out(images.shape);
    const std::size_t per = images.numel() / images.dim(0);
    for (std::size_t i = 0; i < images.dim(0); ++i) {
        CorruptionSpec spec;
        spec.kind = kind;
        spec.severity = severity;
        spec.seed = mix_seed(seed, i);
        const Tensor c = corrupt(image_at(images, i), spec, table);
        std::copy(c.data.begin(), c.data.end(), out.data.begin() + i * per);
    }
    return out;
}

/// Batched Top-1 with zero-centering; avoids materializing one giant forward.
double top1_of(Network& net, const Tensor& images, const std::vector<std::size_t>& labels,
               const std::vector<double>& mean, std::size_t batch) {
    return evaluate(net, images, labels, mean, batch).accuracy;
}

struct LoadedModel {
    Network net;
    std::vector<double> mean;
};

LoadedModel load_model(const std::string& ckpt_path, Rng& rng) {
    const Checkpoint ck = checkpoint_load(ckpt_path);
    LoadedModel m{load_network(ck, rng), {}};
    if (const Tensor* mean = ck.find("norm.mean"))
        m.mean = mean->data;
    else
        m.mean.assign(1, 0.0);
    return m;
}

std::vector<CorruptionKind> kinds_from_config(const Config& cfg) {
    const std::string text = cfg.get_or("eval.kinds", "all");
    if (text == "all")
        return {kAllCorruptions.begin(), kAllCorruptions.end()};
    std::vector<CorruptionKind> kinds;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t comma = text.find(',', start);
        if (comma == std::string::npos) comma = text.size();
        const std::string name = text.substr(start, comma - start);
        start = comma + 1;
        if (!name.empty()) kinds.push_back(corruption_from_name(name));
    }
    check(!kinds.empty(), ErrorKind::usage, "eval.kinds selected no corruption kinds");
    return kinds;
}

// ---------------------------------------------------------------------------
// subcommands

int cmd_train(const Config& cfg, const std::string& out_dir) {
    check(!out_dir.empty(), ErrorKind::usage, "train: --out is required");
    write_effective_config(cfg, out_dir);
    const Splits data = load_data(cfg);

    const ActivationSpec spec = af_from_config(cfg);
    const std::string net_name = cfg.get_or("net.arch", "fig8");
    check(net_name == "fig8" || net_name == "fig8_fc2", ErrorKind::usage,
          "unknown net '" + net_name + "' (expected fig8 or fig8_fc2)");

    TrainOptions opts;
    opts.epochs = static_cast<std::size_t>(cfg.integer_or("train.epochs", 12));
    opts.batch = static_cast<std::size_t>(cfg.integer_or("train.batch", 128));
    opts.lr = cfg.number_or("train.lr", 0.1);
    opts.momentum = cfg.number_or("train.momentum", 0.9);
    opts.l2 = cfg.number_or("train.l2", 5e-4);
    opts.val_fraction = cfg.number_or("train.val_fraction", 0.15);
    opts.seed = static_cast<std::uint64_t>(cfg.integer_or("train.seed", 1));
    opts.schedule = schedule_from_config(cfg, opts.schedule);
    opts.dct_augment = cfg.flag_or("train.dct", false);
    opts.augment_policy.t_min = cfg.number_or("train.t_min", 0.0);
    opts.augment_policy.t_max = cfg.number_or("train.t_max", 0.5);
    opts.log_csv = (fs::path(out_dir) / "log.csv").string();

    Rng rng(static_cast<std::uint64_t>(cfg.integer_or("train.init_seed", 42)));
    Network net = make_fig8(spec, net_name == "fig8_fc2", rng, data.train.classes);

    const TrainResult res =
        train(net, data.train, data.test, opts,
              [](std::size_t epoch, const EvalResult& tr, const EvalResult& val, double lr) {
                  std::cout << "epoch " << epoch << "  train loss " << csv_num(tr.loss)
                            << "  top1 " << csv_num(tr.accuracy) << "  val top1 "
                            << csv_num(val.accuracy) << "  lr " << csv_num(lr) << "\n";
              });

    Tensor mean({res.mean.size()});
    mean.data = res.mean;
    save_network((fs::path(out_dir) / "model.ckpt").string(), net, {{"norm.mean", mean}});
    std::cout << "val top1 " << csv_num(res.val_top1) << "  test top1 "
              << csv_num(res.test_top1) << "\n";
    std::cout << "wrote " << (fs::path(out_dir) / "model.ckpt").string() << "\n";
    return 0;
}

int cmd_eval(const Config& cfg, const std::string& ckpt, const std::string& out_dir) {
    check(!ckpt.empty(), ErrorKind::usage, "eval: --ckpt is required");
    check(!out_dir.empty(), ErrorKind::usage, "eval: --out is required");
    write_effective_config(cfg, out_dir);

    Rng rng(1);
    LoadedModel model = load_model(ckpt, rng);
    const Splits data = load_data(cfg);
    const Tensor& test = data.test.images;
    const std::vector<std::size_t>& labels = data.test.labels;

    const SeverityTable table = table_from_config(cfg);
    const std::vector<CorruptionKind> kinds = kinds_from_config(cfg);
    const auto seed = static_cast<std::uint64_t>(cfg.integer_or("eval.seed", 7));
    const auto batch = static_cast<std::size_t>(cfg.integer_or("eval.batch", 256));

    // Top-1 per kind and severity.
    {
        CsvWriter csv((fs::path(out_dir) / "metrics.csv").string(), "kind,severity,top1");
        const double clean = top1_of(model.net, test, labels, model.mean, batch);
        csv.row({"clean", "0", csv_num(clean)});
        std::cout << "clean top1 " << csv_num(clean) << "\n";
        for (CorruptionKind kind : kinds)
            for (int sev = 1; sev <= 5; ++sev) {
                const Tensor corrupted = corrupt_set(
                    test, kind, sev, mix_seed(seed, static_cast<std::uint64_t>(kind) * 8 + sev),
                    table);
                csv.row({corruption_name(kind), std::to_string(sev),
                         csv_num(top1_of(model.net, corrupted, labels, model.mean, batch))});
            }
    }

    // Flip probability over progressive perturbation clips.
    {
        const auto n_clips = std::min<std::size_t>(
            static_cast<std::size_t>(cfg.integer_or("eval.clips", 50)), test.dim(0));
        const auto frames = static_cast<std::size_t>(cfg.integer_or("eval.frames", 10));
        std::vector<PerturbationSequence> sequences;
        for (CorruptionKind kind : kinds)
            for (std::size_t i = 0; i < n_clips; ++i)
                sequences.push_back(make_sequence(
                    image_at(test, i), kind, frames,
                    mix_seed(seed, static_cast<std::uint64_t>(kind) * 131 + i), table));
        const FlipReport report = flip_probability(
            sequences, [&](const std::vector<Tensor>& clip_frames) {
                Tensor batch_t({clip_frames.size(), test.dim(1), test.dim(2), test.dim(3)});
                const std::size_t per = batch_t.numel() / clip_frames.size();
                for (std::size_t f = 0; f < clip_frames.size(); ++f)
                    std::copy(clip_frames[f].data.begin(), clip_frames[f].data.end(),
                              batch_t.data.begin() + f * per);
                zero_center(batch_t, model.mean);
                return predict(model.net.forward(batch_t));
            });
        CsvWriter csv((fs::path(out_dir) / "fp.csv").string(), "kind,FP,mFP");
        for (const auto& [kind, fp] : report.per_kind)
            csv.row({corruption_name(kind), csv_num(fp), csv_num(report.mfp)});
        std::cout << "mFP " << csv_num(report.mfp) << " over " << report.per_kind.size()
                  << " kinds\n";
    }

    // Feature shift on progressively noisier copies (severity 1 = clean).
    {
        const auto limit = std::min<std::size_t>(
            static_cast<std::size_t>(cfg.integer_or("eval.shift_limit", 256)), test.dim(0));
        Tensor raw({limit, test.dim(1), test.dim(2), test.dim(3)});
        std::copy(test.data.begin(), test.data.begin() + raw.numel(), raw.data.begin());
        Tensor clean = raw;
        zero_center(clean, model.mean);
        const CorruptionKind shift_kind =
            corruption_from_name(cfg.get_or("eval.shift_kind", "gaussian_noise"));
        std::vector<Tensor> corrupted;
        for (int sev = 1; sev <= 5; ++sev) {
            Tensor c = corrupt_set(raw, shift_kind, sev, mix_seed(seed, 977 + sev), table);
            zero_center(c, model.mean);
            corrupted.push_back(std::move(c));
        }
        const ShiftReport report = feature_shift(model.net, clean, corrupted);
        CsvWriter csv((fs::path(out_dir) / "shift.csv").string(),
                      "severity,CS,CS_depth1,CS_depth2,CS_depth3,CS_depth4");
        for (std::size_t s = 0; s < report.per_severity.size(); ++s)
            csv.row({std::to_string(s + 1), csv_num(report.per_severity[s]),
                     csv_num(report.per_depth[s][0]), csv_num(report.per_depth[s][1]),
                     csv_num(report.per_depth[s][2]), csv_num(report.per_depth[s][3])});
    }

    // Activation-magnitude histogram: clean vs high- and low-frequency sets.
    {
        const auto limit = std::min<std::size_t>(
            static_cast<std::size_t>(cfg.integer_or("eval.hist_limit", 256)), test.dim(0));
        Tensor clean({limit, test.dim(1), test.dim(2), test.dim(3)});
        std::copy(test.data.begin(), test.data.begin() + clean.numel(), clean.data.begin());
        Tensor hfc = corrupt_set(clean, CorruptionKind::gaussian_noise, 3,
                                 mix_seed(seed, 1231), table);
        Tensor lfc = corrupt_set(clean, CorruptionKind::defocus_blur, 3,
                                 mix_seed(seed, 1232), table);
        zero_center(clean, model.mean);
        zero_center(hfc, model.mean);
        zero_center(lfc, model.mean);
        const Histogram h_clean = activation_histogram(model.net, clean);
        const Histogram h_hfc = activation_histogram(model.net, hfc, 100, h_clean.hi);
        const Histogram h_lfc = activation_histogram(model.net, lfc, 100, h_clean.hi);
        CsvWriter csv((fs::path(out_dir) / "hist.csv").string(),
                      "bin_lo,bin_hi,count_clean,count_lfc,count_hfc");
        const double step = h_clean.hi / static_cast<double>(h_clean.counts.size());
        for (std::size_t b = 0; b < h_clean.counts.size(); ++b)
            csv.row({csv_num(static_cast<double>(b) * step),
                     csv_num(static_cast<double>(b + 1) * step), csv_num(h_clean.counts[b]),
                     csv_num(h_lfc.counts[b]), csv_num(h_hfc.counts[b])});
        std::cout << "activation mean  clean " << csv_num(h_clean.mean) << "  hfc "
                  << csv_num(h_hfc.mean) << "  lfc " << csv_num(h_lfc.mean) << "\n";
    }

    std::cout << "wrote metrics.csv fp.csv shift.csv hist.csv in " << out_dir << "\n";
    return 0;
}

int cmd_corrupt(const Config& cfg, const std::string& in_path, const std::string& out_dir,
                const std::string& kind_name, int severity) {
    check(!out_dir.empty(), ErrorKind::usage, "corrupt: --out is required");
    check(!kind_name.empty(), ErrorKind::usage, "corrupt: --kind is required");
    const CorruptionKind kind = corruption_from_name(kind_name);
    write_effective_config(cfg, out_dir);

    Tensor images;
    if (!in_path.empty()) {
        images = load_idx_images(in_path);
    } else {
        const Splits data = load_data(cfg);
        images = data.test.images;
    }
    const auto limit = static_cast<std::size_t>(cfg.integer_or("data.test_limit", 0));
    if (limit > 0 && limit < images.dim(0)) {
        Tensor trimmed({limit, images.dim(1), images.dim(2), images.dim(3)});
        std::copy(images.data.begin(), images.data.begin() + trimmed.numel(),
                  trimmed.data.begin());
        images = std::move(trimmed);
    }

    const auto seed = static_cast<std::uint64_t>(cfg.integer_or("eval.seed", 7));
    const Tensor out = corrupt_set(images, kind, severity, seed, table_from_config(cfg));
    const std::string name =
        std::string(corruption_name(kind)) + "-s" + std::to_string(severity);
    const std::string path = (fs::path(out_dir) / (name + "-images-idx3-ubyte")).string();
    write_idx_images(path, out);
    std::cout << "wrote " << path << " (" << out.dim(0) << " images)\n";
    return 0;
}

int cmd_augment(const Config& cfg, const std::string& in_path, const std::string& out_dir,
                bool dct_mode) {
    check(!out_dir.empty(), ErrorKind::usage, "augment: --out is required");
    check(dct_mode, ErrorKind::usage, "augment: select a mode (--dct)");
    write_effective_config(cfg, out_dir);

    Tensor images;
    if (!in_path.empty()) {
        images = load_idx_images(in_path);
    } else {
        const Splits data = load_data(cfg);
        images = data.test.images;
    }
    const auto limit = static_cast<std::size_t>(cfg.integer_or("data.test_limit", 0));
    if (limit > 0 && limit < images.dim(0)) {
        Tensor trimmed({limit, images.dim(1), images.dim(2), images.dim(3)});
        std::copy(images.data.begin(), images.data.begin() + trimmed.numel(),
                  trimmed.data.begin());
        images = std::move(trimmed);
    }

    AugmentPolicy policy;
    policy.t_min = cfg.number_or("train.t_min", 0.0);
    policy.t_max = cfg.number_or("train.t_max", 0.5);
    augment_validate(policy);

    Rng rng(static_cast<std::uint64_t>(cfg.integer_or("eval.seed", 7)));
    Tensor out(images.shape);
    const std::size_t per = images.numel() / images.dim(0);
    for (std::size_t i = 0; i < images.dim(0); ++i) {
        const Tensor aug = augment(image_at(images, i), policy, rng);
        std::copy(aug.data.begin(), aug.data.end(), out.data.begin() + i * per);
    }
    const std::string path = (fs::path(out_dir) / "augmented-images-idx3-ubyte").string();
    write_idx_images(path, out);
    std::cout << "wrote " << path << " (" << out.dim(0) << " images)\n";
    return 0;
}

int cmd_map_decisions(const Config& cfg, const std::string& ckpt, const std::string& svg_path,
                      const std::string& csv_path) {
    check(!ckpt.empty(), ErrorKind::usage, "map-decisions: --ckpt is required");
    check(!svg_path.empty(), ErrorKind::usage, "map-decisions: --out is required");

    Rng rng(1);
    LoadedModel model = load_model(ckpt, rng);
    Fc2Net head = build_fc2_net(model.net);

    const Splits data = load_data(cfg);
    const auto limit = std::min<std::size_t>(
        static_cast<std::size_t>(cfg.integer_or("map.feature_limit", 500)),
        data.test.images.dim(0));
    Tensor sample({limit, data.test.images.dim(1), data.test.images.dim(2),
                   data.test.images.dim(3)});
    std::copy(data.test.images.data.begin(),
              data.test.images.data.begin() + sample.numel(), sample.data.begin());
    zero_center(sample, model.mean);
    const auto feats = fc2_features(model.net, sample);

    // Wedge apex: bias-free heads put every boundary through (0,0), so the
    // sweep is origin-centred and sized to cover the feature mass.
    const auto n = static_cast<std::size_t>(cfg.integer_or("map.n", 8));
    const double dtheta = cfg.number_or("map.dtheta", 0.01);
    const double q = cfg.number_or("map.quantile", 0.99);
    const double radius_unit = feature_radius(feats, q, 0.0, 0.0) / static_cast<double>(n);

    DecisionMap map = sweep(head, n, dtheta, 0.0, 0.0, radius_unit);
    fit_boundaries(map);
    std::cout << "ray constancy " << csv_num(ray_constancy(map)) << "  trip points "
              << map.trip_points.size() << "  fits " << map.fits.size() << "\n";

    if (!csv_path.empty()) {
        CsvWriter csv(csv_path, "r,theta,x,y,class,score");
        for (const MapSample& s : map.samples)
            csv.row({std::to_string(s.r_step), csv_num(s.theta), csv_num(s.x), csv_num(s.y),
                     std::to_string(s.cls), csv_num(s.score)});
        std::cout << "wrote " << csv_path << "\n";
    }

    std::vector<std::size_t> feat_labels(feats.size());
    for (std::size_t i = 0; i < feats.size(); ++i) feat_labels[i] = data.test.labels[i];
    std::ofstream svg(svg_path);
    check(svg.good(), ErrorKind::data, "cannot write svg " + svg_path);
    svg << render_map(map, feats, feat_labels);
    std::cout << "wrote " << svg_path << "\n";
    return 0;
}

// plot helpers ---------------------------------------------------------------

std::size_t column_of(const std::vector<std::string>& header, const std::string& name,
                      const std::string& path) {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw Error(ErrorKind::data, path + ": missing column '" + name + "'");
}

double num_cell(const std::vector<std::string>& row, std::size_t col,
                const std::string& path) {
    check(col < row.size(), ErrorKind::data, path + ": short row");
    try {
        return std::stod(row[col]);
    } catch (const std::exception&) {
        throw Error(ErrorKind::data, path + ": cell '" + row[col] + "' is not numeric");
    }
}

int cmd_plot(const std::string& what, const std::string& in_path, const std::string& out_path,
             std::size_t sheet_limit) {
    check(!in_path.empty(), ErrorKind::usage, "plot: --in is required");
    check(!out_path.empty(), ErrorKind::usage, "plot: --out is required");
    std::string svg;

    if (what == "sheet") {
        const Tensor images = load_idx_images(in_path);
        const std::size_t n = std::min<std::size_t>(sheet_limit, images.dim(0));
        std::vector<Tensor> planes;
        std::vector<std::string> captions;
        for (std::size_t i = 0; i < n; ++i) {
            planes.push_back(image_at(images, i));
            captions.push_back("#" + std::to_string(i));
        }
        svg = image_grid(planes, captions);
    } else {
        const auto rows = read_csv(in_path);
        check(rows.size() >= 2, ErrorKind::data, in_path + ": no data rows");
        const std::vector<std::string>& header = rows[0];

        if (what == "train-log") {
            const std::size_t ep = column_of(header, "epoch", in_path);
            const std::size_t split = column_of(header, "split", in_path);
            const std::size_t top1c = column_of(header, "top1", in_path);
            Series tr{"train", {}}, val{"val", {}};
            for (std::size_t i = 1; i < rows.size(); ++i) {
                const double x = num_cell(rows[i], ep, in_path);
                const double y = num_cell(rows[i], top1c, in_path);
                (rows[i][split] == "val" ? val : tr).points.emplace_back(x, y);
            }
            svg = line_chart({tr, val}, "top-1 by epoch", "epoch", "top1");
        } else if (what == "metrics") {
            const std::size_t kind = column_of(header, "kind", in_path);
            const std::size_t sev = column_of(header, "severity", in_path);
            const std::size_t top1c = column_of(header, "top1", in_path);
            std::vector<Series> series;
            for (std::size_t i = 1; i < rows.size(); ++i) {
                if (rows[i][kind] == "clean") continue;
                Series* s = nullptr;
                for (Series& existing : series)
                    if (existing.name == rows[i][kind]) s = &existing;
                if (s == nullptr) {
                    series.push_back({rows[i][kind], {}});
                    s = &series.back();
                }
                s->points.emplace_back(num_cell(rows[i], sev, in_path),
                                       num_cell(rows[i], top1c, in_path));
            }
            svg = line_chart(series, "top-1 by severity", "severity", "top1");
        } else if (what == "shift") {
            const std::size_t sev = column_of(header, "severity", in_path);
            const std::size_t cs = column_of(header, "CS", in_path);
            Series s{"cs", {}};
            for (std::size_t i = 1; i < rows.size(); ++i)
                s.points.emplace_back(num_cell(rows[i], sev, in_path),
                                      num_cell(rows[i], cs, in_path));
            svg = line_chart({s}, "feature cosine similarity", "severity", "cs");
        } else if (what == "fp") {
            const std::size_t kind = column_of(header, "kind", in_path);
            const std::size_t fp = column_of(header, "FP", in_path);
            std::vector<BarGroup> groups;
            for (std::size_t i = 1; i < rows.size(); ++i)
                groups.push_back({rows[i][kind], {num_cell(rows[i], fp, in_path)}});
            svg = bar_chart({"fp"}, groups, "flip probability by kind", "fp");
        } else if (what == "hist") {
            const std::size_t lo = column_of(header, "bin_lo", in_path);
            Series clean{"clean", {}}, lfc{"lfc", {}}, hfc{"hfc", {}};
            const std::size_t c_clean = column_of(header, "count_clean", in_path);
            const std::size_t c_lfc = column_of(header, "count_lfc", in_path);
            const std::size_t c_hfc = column_of(header, "count_hfc", in_path);
            for (std::size_t i = 1; i < rows.size(); ++i) {
                const double x = num_cell(rows[i], lo, in_path);
                clean.points.emplace_back(x, num_cell(rows[i], c_clean, in_path));
                lfc.points.emplace_back(x, num_cell(rows[i], c_lfc, in_path));
                hfc.points.emplace_back(x, num_cell(rows[i], c_hfc, in_path));
            }
            svg = line_chart({clean, lfc, hfc}, "activation magnitudes", "magnitude",
                             "count");
        } else {
            throw Error(ErrorKind::usage,
                        "plot: unknown --what '" + what +
                            "' (expected train-log, metrics, shift, fp, hist, or sheet)");
        }
    }

    std::ofstream out(out_path);
    check(out.good(), ErrorKind::data, "cannot write svg " + out_path);
    out << svg;
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

int error_exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::usage: return 1;
        case ErrorKind::data: return 2;
        case ErrorKind::numeric: return 3;
    }
    return 2;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"low-pass activation research toolkit"};
    app.require_subcommand(1);

    // train ---------------------------------------------------------------
    CLI::App* train_cmd = app.add_subcommand("train", "train a classifier");
    ConfigBinder train_cfg;
    train_cfg.bind_config_flag(train_cmd);
    std::string train_out;
    train_cmd->add_option("--out", train_out, "output directory");
    train_cfg.add(train_cmd, "--dataset", "data.set", "mnist, cifar10, or synth");
    train_cfg.add(train_cmd, "--data-root", "data.root", "dataset root directory");
    train_cfg.add(train_cmd, "--train-limit", "data.train_limit", "cap on training images");
    train_cfg.add(train_cmd, "--test-limit", "data.test_limit", "cap on test images");
    train_cfg.add(train_cmd, "--net", "net.arch", "fig8 or fig8_fc2");
    train_cfg.add(train_cmd, "--af", "af.kind", "activation kind");
    train_cfg.add(train_cmd, "--af-params", "af.params", "activation params k=v,...");
    train_cfg.add(train_cmd, "--epochs", "train.epochs", "training epochs");
    train_cfg.add(train_cmd, "--batch", "train.batch", "batch size");
    train_cfg.add(train_cmd, "--lr", "train.lr", "learning rate");
    train_cfg.add(train_cmd, "--momentum", "train.momentum", "SGD momentum");
    train_cfg.add(train_cmd, "--l2", "train.l2", "weight decay");
    train_cfg.add(train_cmd, "--schedule", "train.schedule", "lr decay epoch:factor,...");
    train_cfg.add(train_cmd, "--seed", "train.seed", "training seed");
    train_cfg.add(train_cmd, "--init-seed", "train.init_seed", "weight init seed");
    train_cfg.add_flag(train_cmd, "--dct", "train.dct", "enable DCT augmentation");
    train_cfg.add(train_cmd, "--t-min", "train.t_min", "augment drop-fraction lower bound");
    train_cfg.add(train_cmd, "--t-max", "train.t_max", "augment drop-fraction upper bound");

    // eval ----------------------------------------------------------------
    CLI::App* eval_cmd = app.add_subcommand("eval", "robustness metrics for a checkpoint");
    ConfigBinder eval_cfg;
    eval_cfg.bind_config_flag(eval_cmd);
    std::string eval_ckpt, eval_out;
    eval_cmd->add_option("--ckpt", eval_ckpt, "checkpoint file");
    eval_cmd->add_option("--out", eval_out, "output directory");
    eval_cfg.add(eval_cmd, "--dataset", "data.set", "mnist, cifar10, or synth");
    eval_cfg.add(eval_cmd, "--data-root", "data.root", "dataset root directory");
    eval_cfg.add(eval_cmd, "--test-limit", "data.test_limit", "cap on test images");
    eval_cfg.add(eval_cmd, "--kinds", "eval.kinds", "corruption kinds (csv) or 'all'");
    eval_cfg.add(eval_cmd, "--seed", "eval.seed", "corruption seed");
    eval_cfg.add(eval_cmd, "--clips", "eval.clips", "perturbation clips per kind");
    eval_cfg.add(eval_cmd, "--frames", "eval.frames", "frames per clip");
    eval_cfg.add(eval_cmd, "--shift-limit", "eval.shift_limit", "images for feature shift");
    eval_cfg.add(eval_cmd, "--severity-conf", "eval.severity_conf", "severity table file");

    // corrupt ---------------------------------------------------------------
    CLI::App* corrupt_cmd = app.add_subcommand("corrupt", "corrupt an image set");
    ConfigBinder corrupt_cfg;
    corrupt_cfg.bind_config_flag(corrupt_cmd);
    std::string corrupt_in, corrupt_out, corrupt_kind;
    int corrupt_severity = 3;
    corrupt_cmd->add_option("--in", corrupt_in, "input IDX image file");
    corrupt_cmd->add_option("--out", corrupt_out, "output directory");
    corrupt_cmd->add_option("--kind", corrupt_kind, "corruption kind");
    corrupt_cmd->add_option("--severity", corrupt_severity, "severity 1..5");
    corrupt_cfg.add(corrupt_cmd, "--dataset", "data.set", "dataset when --in is omitted");
    corrupt_cfg.add(corrupt_cmd, "--data-root", "data.root", "dataset root directory");
    corrupt_cfg.add(corrupt_cmd, "--limit", "data.test_limit", "cap on images");
    corrupt_cfg.add(corrupt_cmd, "--seed", "eval.seed", "corruption seed");
    corrupt_cfg.add(corrupt_cmd, "--severity-conf", "eval.severity_conf",
                    "severity table file");

    // augment ---------------------------------------------------------------
    CLI::App* augment_cmd = app.add_subcommand("augment", "frequency-domain augmentation");
    ConfigBinder augment_cfg;
    augment_cfg.bind_config_flag(augment_cmd);
    std::string augment_in, augment_out;
    bool augment_dct = false;
    augment_cmd->add_flag("--dct", augment_dct, "frequency-drop augmentation mode");
    augment_cmd->add_option("--in", augment_in, "input IDX image file");
    augment_cmd->add_option("--out", augment_out, "output directory");
    augment_cfg.add(augment_cmd, "--dataset", "data.set", "dataset when --in is omitted");
    augment_cfg.add(augment_cmd, "--data-root", "data.root", "dataset root directory");
    augment_cfg.add(augment_cmd, "--limit", "data.test_limit", "cap on images");
    augment_cfg.add(augment_cmd, "--t-min", "train.t_min", "drop-fraction lower bound");
    augment_cfg.add(augment_cmd, "--t-max", "train.t_max", "drop-fraction upper bound");
    augment_cfg.add(augment_cmd, "--seed", "eval.seed", "augmentation seed");

    // map-decisions -----------------------------------------------------------
    CLI::App* map_cmd = app.add_subcommand("map-decisions", "polar decision-space map");
    ConfigBinder map_cfg;
    map_cfg.bind_config_flag(map_cmd);
    std::string map_ckpt, map_svg, map_csv;
    map_cmd->add_option("--ckpt", map_ckpt, "checkpoint with a 2-unit bottleneck");
    map_cmd->add_option("--out", map_svg, "output SVG path");
    map_cmd->add_option("--csv", map_csv, "output CSV path");
    map_cfg.add(map_cmd, "--n", "map.n", "radius steps");
    map_cfg.add(map_cmd, "--dtheta", "map.dtheta", "angular step");
    map_cfg.add(map_cmd, "--quantile", "map.quantile", "feature-mass quantile for radius");
    map_cfg.add(map_cmd, "--feature-limit", "map.feature_limit", "images for the scatter");
    map_cfg.add(map_cmd, "--dataset", "data.set", "dataset for the feature cloud");
    map_cfg.add(map_cmd, "--data-root", "data.root", "dataset root directory");
    map_cfg.add(map_cmd, "--test-limit", "data.test_limit", "cap on test images");

    // plot ------------------------------------------------------------------
    CLI::App* plot_cmd = app.add_subcommand("plot", "render CSV outputs as SVG");
    std::string plot_what, plot_in, plot_out;
    std::size_t plot_sheet_limit = 16;
    plot_cmd->add_option("--what", plot_what,
                         "train-log, metrics, shift, fp, hist, or sheet");
    plot_cmd->add_option("--in", plot_in, "input CSV (or IDX for sheet)");
    plot_cmd->add_option("--out", plot_out, "output SVG path");
    plot_cmd->add_option("--limit", plot_sheet_limit, "tiles in a contact sheet");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (train_cmd->parsed()) return cmd_train(train_cfg.merged(), train_out);
        if (eval_cmd->parsed()) return cmd_eval(eval_cfg.merged(), eval_ckpt, eval_out);
        if (corrupt_cmd->parsed())
            return cmd_corrupt(corrupt_cfg.merged(), corrupt_in, corrupt_out, corrupt_kind,
                               corrupt_severity);
        if (augment_cmd->parsed())
            return cmd_augment(augment_cfg.merged(), augment_in, augment_out, augment_dct);
        if (map_cmd->parsed())
            return cmd_map_decisions(map_cfg.merged(), map_ckpt, map_svg, map_csv);
        if (plot_cmd->parsed()) return cmd_plot(plot_what, plot_in, plot_out, plot_sheet_limit);
    } catch (const lpnet::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return error_exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
