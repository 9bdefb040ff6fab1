#include "normbound/harness.hpp"

#include "normbound/csv.hpp"
#include "normbound/errors.hpp"
#include "normbound/rng.hpp"
#include "normbound/svg.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>

namespace normbound {

namespace fs = std::filesystem;

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
    std::uint64_t s = seed ^ (0x9e3779b97f4a7c15ULL * (tag + 0x51ULL));
    splitmix64(s);
    return splitmix64(s);
}

double median_finite(std::vector<double> v) {
    v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return !std::isfinite(x); }),
            v.end());
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Dataset load_dataset(const ExperimentConfig& cfg) {
    Dataset ds;
    if (cfg.data.source == DataConfig::Source::idx) {
        ds = load_idx(cfg.data.images_path, cfg.data.labels_path, cfg.data.classes);
    } else {
        ds = synthetic(cfg.data.classes, cfg.data.per_class, cfg.data.dim, cfg.data.separation,
                       cfg.data.seed);
    }
    if (cfg.data.subset_n > 0 && cfg.data.subset_n < ds.n) {
        ds = subset(ds, cfg.data.subset_n, derive_seed(cfg.data.seed, 11));
    }
    if (ds.input_dim != cfg.model.input_dim) {
        throw config_error("model.input_dim " + std::to_string(cfg.model.input_dim) +
                           " does not match the dataset input dimension " +
                           std::to_string(ds.input_dim));
    }
    if (ds.target_dim != cfg.model.output_dim) {
        throw config_error("model.output_dim " + std::to_string(cfg.model.output_dim) +
                           " does not match the dataset target dimension " +
                           std::to_string(ds.target_dim));
    }
    return ds;
}

const std::vector<std::string>& trace_columns() {
    static const std::vector<std::string> cols = {
        "step",          "train_loss",      "log_loss",
        "U",             "L",               "D",
        "S",             "log_local_grad_norm", "log_lower_bound",
        "log_upper_bound", "degenerate",    "pearson_upper",
        "pearson_lower", "pearson_zero_var", "q_min",
        "measured_M"};
    return cols;
}

namespace {

constexpr double kLogFloor = 1e-300;
constexpr std::uint64_t kLateStep = 500; // "late" summary statistics start here

double log_floored(double v) { return std::log(std::max(v, kLogFloor)); }

DiagnosticsOptions diag_options(const ExperimentConfig& cfg) {
    DiagnosticsOptions opts;
    opts.weights = cfg.diagnostics.weights;
    opts.eig_floor_scale = cfg.diagnostics.eig_floor_scale;
    return opts;
}

struct SampledBatch {
    std::vector<std::size_t> indices; // into the training pool
};

// Uniform draw without replacement; the scratch pool keeps selection O(batch).
SampledBatch sample_batch(std::vector<std::size_t>& scratch, std::size_t batch, Rng& rng) {
    SampledBatch out;
    out.indices.reserve(batch);
    const std::size_t n = scratch.size();
    for (std::size_t i = 0; i < batch; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
        std::swap(scratch[i], scratch[j]);
        out.indices.push_back(scratch[i]);
    }
    return out;
}

double norm_equivalence_gamma(const OmegaSpec& omega, std::size_t dim) {
    // For every Lp family ||e_i|| = 1, so normalized(e_i) = (r a)^(1/r) and the
    // upper equivalence constant is sqrt(dim) * (r a)^(1/r).
    const double r = omega.power.order;
    const double rc = conjugate_order(r);
    const double hi = std::sqrt(static_cast<double>(dim)) *
                      std::pow(r * omega.power.scale, 1.0 / r);
    return rc * std::pow(hi, rc);
}

} // namespace

TrainSummary cmd_train(const ExperimentConfig& cfg, unsigned threads) {
    const Dataset ds = load_dataset(cfg);
    const auto all = ds.samples();

    if (ds.n <= cfg.diagnostics.batch_size) {
        throw config_error("dataset of " + std::to_string(ds.n) +
                           " samples is too small for a held-out diagnostic batch of " +
                           std::to_string(cfg.diagnostics.batch_size));
    }

    // fixed held-out diagnostic batch; the remainder is the training pool
    std::vector<std::size_t> perm(ds.n);
    for (std::size_t i = 0; i < ds.n; ++i) perm[i] = i;
    {
        Rng shuffle_rng(derive_seed(cfg.seed, 3));
        for (std::size_t i = 0; i + 1 < ds.n; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(shuffle_rng.below(ds.n - i));
            std::swap(perm[i], perm[j]);
        }
    }
    std::vector<DatasetSample> diag_samples;
    std::vector<DatasetSample> train_samples;
    diag_samples.reserve(cfg.diagnostics.batch_size);
    train_samples.reserve(ds.n - cfg.diagnostics.batch_size);
    for (std::size_t i = 0; i < ds.n; ++i) {
        if (i < cfg.diagnostics.batch_size) diag_samples.push_back(all[perm[i]]);
        else train_samples.push_back(all[perm[i]]);
    }
    const std::size_t train_n = train_samples.size();

    std::uint64_t steps = cfg.optimizer.steps;
    const std::size_t steps_per_epoch =
        std::max<std::size_t>(1, train_n / std::max<std::size_t>(1, cfg.optimizer.batch_size));
    if (steps == 0 && cfg.optimizer.epochs > 0) steps = cfg.optimizer.epochs * steps_per_epoch;
    if (steps > 0 && cfg.optimizer.batch_size > train_n) {
        throw config_error("optimizer.batch_size exceeds the training pool of " +
                           std::to_string(train_n) + " samples");
    }

    const ParamModel model = build(cfg.model);
    std::vector<double> theta = init(model, cfg.init);

    const bool adaptive = cfg.optimizer.adaptive_step;
    // the optimal-step analysis is stated for plain SGD; momentum is forced off
    SgdState state = make_sgd(std::move(theta), cfg.optimizer.lr,
                              adaptive ? 0.0 : cfg.optimizer.momentum);

    std::optional<DropoutEvaluator> dropout;
    if (cfg.model.dropout_rate > 0) {
        dropout.emplace(model, cfg.model.dropout_rate, derive_seed(cfg.seed, 2));
    }

    fs::create_directories(cfg.output_dir);
    const fs::path run_dir = cfg.output_dir;
    const fs::path trace_path = run_dir / "trace.csv";
    std::ofstream trace(trace_path, std::ios::binary);
    if (!trace) throw data_error(trace_path.string() + ": cannot open for writing");
    trace << join_csv_row(trace_columns());

    const DiagnosticsOptions opts = diag_options(cfg);

    TrainSummary summary;
    summary.run_dir = run_dir;
    summary.trace_path = trace_path;
    summary.steps = steps;
    summary.gamma_equivalence = norm_equivalence_gamma(cfg.optimizer.omega, model.theta_count);
    summary.min_local_grad_norm = std::numeric_limits<double>::infinity();
    summary.max_measured_m = std::numeric_limits<double>::quiet_NaN();

    std::vector<double> series_loss, series_upper, series_lower;
    std::vector<double> pearson_upper_all, pearson_lower_all, pearson_upper_late,
        pearson_lower_late;

    Rng batch_rng(derive_seed(cfg.seed, 1000));
    std::vector<std::size_t> scratch(train_n);
    for (std::size_t i = 0; i < train_n; ++i) scratch[i] = i;

    std::vector<double> grad(model.theta_count);
    const std::size_t w = cfg.diagnostics.pearson_window;

    for (std::uint64_t t = 0; t < steps; ++t) {
        if (t % steps_per_epoch == 0) {
            batch_rng = Rng(derive_seed(cfg.seed, 1000 + t / steps_per_epoch));
        }

        const bool diag_event = t % cfg.diagnostics.stride == 0;
        std::vector<std::string> row;

        double q_min = std::numeric_limits<double>::quiet_NaN();
        if (diag_event) {
            BatchContext ctx;
            if (cfg.loss.tag == LossKind::Tag::softmax_ce) {
                ctx = batch_context(model, state.theta, diag_samples, cfg.loss);
                q_min = ctx.softmax_q_min;
            }
            const SmoothnessProfile prof = profile(cfg.loss, ctx, cfg.loss_profile);
            const DatasetBounds db =
                dataset_bounds(model, state.theta, diag_samples, cfg.loss, prof, opts, threads);

            const double gap = db.mean_loss - prof.per_sample_optimum;
            const double log_loss = log_floored(gap);
            const double log_lower = log_floored(db.lower);
            const double log_upper = db.degenerate
                                         ? std::numeric_limits<double>::infinity()
                                         : log_floored(db.upper);

            series_loss.push_back(log_loss);
            series_upper.push_back(log_floored(db.upper_floored));
            series_lower.push_back(log_lower);

            double r_up = std::numeric_limits<double>::quiet_NaN();
            double r_lo = std::numeric_limits<double>::quiet_NaN();
            bool zero_var = false;
            if (series_loss.size() >= w) {
                const std::size_t off = series_loss.size() - w;
                bool z1 = false, z2 = false;
                r_up = pearson({series_loss.data() + off, w}, {series_upper.data() + off, w}, &z1);
                r_lo = pearson({series_loss.data() + off, w}, {series_lower.data() + off, w}, &z2);
                zero_var = z1 || z2;
                if (!zero_var) {
                    pearson_upper_all.push_back(r_up);
                    pearson_lower_all.push_back(r_lo);
                    if (t > kLateStep) {
                        pearson_upper_late.push_back(r_up);
                        pearson_lower_late.push_back(r_lo);
                    }
                }
            }

            if (!db.degenerate) {
                const double slack = 1e-6 * std::max(1.0, std::abs(gap));
                const bool outside = !(db.lower <= gap + slack && gap <= db.upper + slack);
                if (prof.empirical) {
                    ++summary.empirical_rows;
                    if (outside) ++summary.empirical_violations;
                } else {
                    ++summary.sandwich_rows;
                    if (outside) ++summary.sandwich_violations;
                }
            }
            summary.min_local_grad_norm =
                std::min(summary.min_local_grad_norm, db.mean_local_grad_norm_r);

            row = {format_u64(t),
                   "",
                   format_double(log_loss),
                   format_double(db.structural.err.u),
                   format_double(db.structural.err.l),
                   format_double(db.structural.err.d),
                   format_double(db.structural.err.s),
                   format_double(log_floored(db.mean_local_grad_norm_r)),
                   format_double(log_lower),
                   format_double(log_upper),
                   db.degenerate ? "1" : "0",
                   format_double(r_up),
                   format_double(r_lo),
                   zero_var ? "1" : "0",
                   format_double(q_min),
                   ""};
        }

        if (cfg.diagnostics.checkpoint_stride > 0 && t % cfg.diagnostics.checkpoint_stride == 0) {
            save_theta(run_dir / ("checkpoint_" + std::to_string(t) + ".bin"), state.theta);
        }

        // mini-batch gradient
        const SampledBatch batch = sample_batch(scratch, cfg.optimizer.batch_size, batch_rng);
        std::fill(grad.begin(), grad.end(), 0.0);
        double batch_loss = 0;
        for (const std::size_t idx : batch.indices) {
            const auto& z = train_samples[idx];
            ForwardResult fwd =
                dropout ? dropout->forward(state.theta, z.x) : forward(model, state.theta, z.x);
            batch_loss += loss_eval(cfg.loss, fwd.output, z.y);
            const auto grad_f = loss_grad_output(cfg.loss, fwd.output, z.y);
            const auto g = vjp_params(fwd.tape, grad_f);
            for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += g[i];
        }
        const double inv_b = 1.0 / static_cast<double>(batch.indices.size());
        batch_loss *= inv_b;
        for (auto& g : grad) g *= inv_b;

        if (t == 0) summary.initial_train_loss = batch_loss;
        summary.final_train_loss = batch_loss;

        const bool measure_m = cfg.optimizer.m_stride > 0 && t % cfg.optimizer.m_stride == 0;
        std::vector<double> theta_before;
        if (measure_m) theta_before = state.theta;

        if (adaptive) {
            const OptimalStep os = optimal_step(cfg.optimizer.omega, grad);
            if (os.alpha > 0) {
                state.lr = os.alpha;
                sgd_step(state, grad);
            } else {
                ++state.step;
            }
        } else {
            sgd_step(state, grad);
        }

        double measured_m = std::numeric_limits<double>::quiet_NaN();
        if (measure_m) {
            measured_m = estimate_M(cfg.loss, model, theta_before, state.theta, train_samples,
                                    batch.indices);
            summary.max_measured_m = std::isnan(summary.max_measured_m)
                                         ? measured_m
                                         : std::max(summary.max_measured_m, measured_m);
        }

        if (diag_event) {
            row[1] = format_double(batch_loss);
            row[15] = format_double(measured_m);
            trace << join_csv_row(row);
        }
    }

    save_theta(run_dir / "checkpoint_final.bin", state.theta);
    trace.close();

    summary.median_pearson_upper = median_finite(pearson_upper_all);
    summary.median_pearson_lower = median_finite(pearson_lower_all);
    const double late_up = median_finite(pearson_upper_late);
    const double late_lo = median_finite(pearson_lower_late);

    std::ofstream sum(run_dir / "summary.txt", std::ios::binary);
    sum << "steps = " << format_u64(summary.steps) << "\n"
        << "theta_count = " << format_u64(model.theta_count) << "\n"
        << "initial_train_loss = " << format_double(summary.initial_train_loss) << "\n"
        << "final_train_loss = " << format_double(summary.final_train_loss) << "\n"
        << "max_measured_m = " << format_double(summary.max_measured_m) << "\n"
        << "sandwich_rows = " << format_u64(summary.sandwich_rows) << "\n"
        << "sandwich_violations = " << format_u64(summary.sandwich_violations) << "\n"
        << "empirical_rows = " << format_u64(summary.empirical_rows) << "\n"
        << "empirical_violations = " << format_u64(summary.empirical_violations) << "\n"
        << "median_pearson_upper = " << format_double(summary.median_pearson_upper) << "\n"
        << "median_pearson_lower = " << format_double(summary.median_pearson_lower) << "\n"
        << "median_pearson_upper_after_500 = " << format_double(late_up) << "\n"
        << "median_pearson_lower_after_500 = " << format_double(late_lo) << "\n"
        << "min_local_grad_norm = " << format_double(summary.min_local_grad_norm) << "\n"
        << "gamma_equivalence = " << format_double(summary.gamma_equivalence) << "\n";
    sum.close();

    return summary;
}

std::filesystem::path cmd_analyze(const ExperimentConfig& cfg,
                                  const std::filesystem::path& checkpoint, unsigned threads) {
    const Dataset ds = load_dataset(cfg);
    const auto samples = ds.samples();
    const ParamModel model = build(cfg.model);
    const std::vector<double> theta = load_theta(checkpoint);
    if (theta.size() != model.theta_count) {
        throw data_error("checkpoint holds " + std::to_string(theta.size()) +
                         " parameters, model expects " + std::to_string(model.theta_count));
    }

    BatchContext ctx;
    if (cfg.loss.tag == LossKind::Tag::softmax_ce) {
        ctx = batch_context(model, theta, samples, cfg.loss);
    }
    const SmoothnessProfile prof = profile(cfg.loss, ctx, cfg.loss_profile);
    const DiagnosticsOptions opts = diag_options(cfg);

    fs::create_directories(cfg.output_dir);
    const fs::path out_path = fs::path(cfg.output_dir) / "analysis.csv";
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw data_error(out_path.string() + ": cannot open for writing");
    out << "sample,loss,lambda_min,lambda_max,U,L,D,S,grad_norm,local_grad_norm_r,lower,upper,"
           "degenerate\n";

    std::vector<StructuralReport> reports(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        reports[i] =
            sample_report(model, theta, samples[i].x, samples[i].y, cfg.loss, prof, opts);
    }
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& r = reports[i];
        out << join_csv_row({format_u64(i), format_double(r.loss), format_double(r.lambda_min),
                             format_double(r.lambda_max), format_double(r.err.u),
                             format_double(r.err.l), format_double(r.err.d),
                             format_double(r.err.s), format_double(r.grad_theta_norm2),
                             format_double(r.local_grad_norm_r), format_double(r.lower_bound),
                             format_double(r.upper_bound), r.degenerate ? "1" : "0"});
    }

    const DatasetBounds db =
        dataset_bounds(model, theta, samples, cfg.loss, prof, opts, threads);
    out << join_csv_row(
        {"all", format_double(db.mean_loss), format_double(db.structural.lambda_min),
         format_double(db.structural.lambda_max), format_double(db.structural.err.u),
         format_double(db.structural.err.l), format_double(db.structural.err.d),
         format_double(db.structural.err.s), "nan", format_double(db.mean_local_grad_norm_r),
         format_double(db.lower), format_double(db.upper), db.degenerate ? "1" : "0"});
    return out_path;
}

std::filesystem::path cmd_depth_sweep(const ExperimentConfig& cfg, unsigned threads) {
    (void)threads;
    const Dataset ds = load_dataset(cfg);
    const auto all = ds.samples();
    const std::size_t batch = std::min<std::size_t>(cfg.diagnostics.batch_size, ds.n);
    std::vector<DatasetSample> diag_samples(all.begin(),
                                            all.begin() + static_cast<std::ptrdiff_t>(batch));
    const DiagnosticsOptions opts = diag_options(cfg);

    fs::create_directories(cfg.output_dir);
    const fs::path out_path = fs::path(cfg.output_dir) / "depth_sweep.csv";
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw data_error(out_path.string() + ": cannot open for writing");
    out << "k,skip,seed,U,L,D,S,lambda_min,lambda_max\n";

    for (const std::size_t k : cfg.sweep.k_list) {
        for (const bool skip : {false, true}) {
            for (std::size_t s = 0; s < cfg.sweep.seeds; ++s) {
                ModelConfig mc = cfg.model;
                mc.block_count = k;
                mc.skip_connections = skip;
                const ParamModel model = build(mc);
                InitScheme scheme = cfg.init;
                // same seed for both variants so k=0 rows coincide exactly
                scheme.seed = derive_seed(cfg.seed, 7000 + 131 * k + s);
                const std::vector<double> theta = init(model, scheme);
                const DatasetStructural st =
                    dataset_structural(model, theta, diag_samples, opts);
                out << join_csv_row({format_u64(k), skip ? "1" : "0", format_u64(s),
                                     format_double(st.err.u), format_double(st.err.l),
                                     format_double(st.err.d), format_double(st.err.s),
                                     format_double(st.lambda_min),
                                     format_double(st.lambda_max)});
            }
        }
    }
    return out_path;
}

GicRunSummary cmd_gic(const ExperimentConfig& cfg,
                      const std::optional<std::filesystem::path>& checkpoint,
                      unsigned threads) {
    (void)threads;
    const Dataset ds = load_dataset(cfg);
    const ParamModel model = build(cfg.model);

    GicRunSummary out;
    const auto x0 = ds.input(0);

    {
        const std::vector<double> theta = init(model, cfg.init);
        out.at_init = gic_check(jacobian_params(model, theta, x0));
    }
    if (checkpoint) {
        const std::vector<double> theta = load_theta(*checkpoint);
        if (theta.size() != model.theta_count) {
            throw data_error("checkpoint holds " + std::to_string(theta.size()) +
                             " parameters, model expects " + std::to_string(model.theta_count));
        }
        out.at_checkpoint = gic_check(jacobian_params(model, theta, x0));
    }

    if (cfg.gic.mc_trials > 0) {
        const auto bounds =
            predicted_structural_bounds(cfg.gic.mc_theta, cfg.gic.mc_mf, cfg.gic.mc_epsilon);
        std::size_t contained = 0;
        for (std::size_t trial = 0; trial < cfg.gic.mc_trials; ++trial) {
            const auto pts = sample_ball(cfg.gic.mc_theta, cfg.gic.mc_mf, cfg.gic.mc_epsilon,
                                         derive_seed(cfg.seed, 9000 + trial));
            Jacobian j;
            j.theta_count = cfg.gic.mc_theta;
            j.mf = cfg.gic.mc_mf;
            j.data = pts;
            const auto eigs = sym_eigenvalues(gram_of(j));
            const double u = -std::log(std::max(eigs.front(), kLogFloor));
            const double d = std::log(std::max(eigs.back(), kLogFloor)) -
                             std::log(std::max(eigs.front(), kLogFloor));
            if (u <= bounds.u_max && d <= bounds.d_max) ++contained;
        }
        out.mc_containment_fraction =
            static_cast<double>(contained) / static_cast<double>(cfg.gic.mc_trials);
    }

    fs::create_directories(cfg.output_dir);
    out.report_path = fs::path(cfg.output_dir) / "gic_report.txt";
    std::ofstream rep(out.report_path, std::ios::binary);
    auto dump = [&rep](const std::string& prefix, const GicReport& r) {
        rep << prefix << ".columns = " << format_u64(r.n_columns) << "\n"
            << prefix << ".dim = " << format_u64(r.dim) << "\n"
            << prefix << ".epsilon = " << format_double(r.epsilon) << "\n"
            << prefix << ".fraction_norm_ok = " << format_double(r.fraction_norm_ok) << "\n"
            << prefix << ".fraction_inner_ok = " << format_double(r.fraction_inner_ok) << "\n"
            << prefix << ".max_abs_inner = " << format_double(r.max_abs_inner) << "\n"
            << prefix << ".min_norm = " << format_double(r.min_norm) << "\n"
            << prefix << ".passes = " << (r.passes ? "true" : "false") << "\n";
    };
    dump("init", out.at_init);
    if (out.at_checkpoint) dump("checkpoint", *out.at_checkpoint);
    if (out.mc_containment_fraction >= 0) {
        rep << "mc.trials = " << format_u64(cfg.gic.mc_trials) << "\n"
            << "mc.containment_fraction = " << format_double(out.mc_containment_fraction)
            << "\n";
    }
    return out;
}

ReportSummary cmd_report(const std::filesystem::path& run_dir) {
    const fs::path trace_path = run_dir / "trace.csv";
    if (!fs::exists(trace_path)) {
        throw data_error(trace_path.string() + ": trace not found");
    }
    const CsvTable t = read_csv(trace_path.string());

    auto col = [&t](const std::string& name) {
        std::vector<double> v;
        const std::size_t c = t.column(name);
        v.reserve(t.rows.size());
        for (const auto& row : t.rows) v.push_back(parse_double(row[c]));
        return v;
    };

    const auto step = col("step");
    const auto log_loss = col("log_loss");
    const auto log_lower = col("log_lower_bound");
    const auto log_upper = col("log_upper_bound");
    const auto r_up = col("pearson_upper");
    const auto r_lo = col("pearson_lower");
    const auto u = col("U");
    const auto l = col("L");
    const auto d = col("D");
    const auto s = col("S");
    const auto lgn = col("log_local_grad_norm");

    ReportSummary out;
    out.bounds_svg = run_dir / "bounds.svg";
    out.pearson_svg = run_dir / "pearson.svg";
    out.indicators_svg = run_dir / "indicators.svg";
    out.summary_md = run_dir / "summary.md";

    auto write_file = [](const fs::path& p, const std::string& content) {
        std::ofstream f(p, std::ios::binary);
        if (!f) throw data_error(p.string() + ": cannot open for writing");
        f << content;
    };

    write_file(out.bounds_svg,
               render_line_chart("loss and gradient-based bounds", "step", "ln value",
                                 {{"ln loss", step, log_loss},
                                  {"ln lower", step, log_lower},
                                  {"ln upper", step, log_upper}}));
    write_file(out.pearson_svg,
               render_line_chart("sliding window correlation", "step", "r",
                                 {{"r(ln loss, ln upper)", step, r_up},
                                  {"r(ln loss, ln lower)", step, r_lo}}));
    write_file(out.indicators_svg,
               render_line_chart("spectral indicators", "step", "value",
                                 {{"U", step, u},
                                  {"L", step, l},
                                  {"D", step, d},
                                  {"S", step, s},
                                  {"ln local grad norm", step, lgn}}));

    // final-window medians over the trailing 50 valid correlation values
    auto tail_median = [](const std::vector<double>& v) {
        std::vector<double> finite;
        for (double x : v) {
            if (std::isfinite(x)) finite.push_back(x);
        }
        if (finite.size() > 50) finite.erase(finite.begin(), finite.end() - 50);
        return median_finite(std::move(finite));
    };

    std::string md;
    md += "# run report\n\n";
    md += "| quantity | value |\n|---|---|\n";
    md += "| diagnostic events | " + format_u64(t.rows.size()) + " |\n";
    if (!t.rows.empty()) {
        md += "| final step | " + format_double(step.back()) + " |\n";
        md += "| final ln loss | " + format_double(log_loss.back()) + " |\n";
        md += "| final ln lower bound | " + format_double(log_lower.back()) + " |\n";
        md += "| final ln upper bound | " + format_double(log_upper.back()) + " |\n";
    }
    md += "| final-window median r(ln loss, ln upper) | " + format_double(tail_median(r_up)) +
          " |\n";
    md += "| final-window median r(ln loss, ln lower) | " + format_double(tail_median(r_lo)) +
          " |\n";
    write_file(out.summary_md, md);
    return out;
}

} // namespace normbound
