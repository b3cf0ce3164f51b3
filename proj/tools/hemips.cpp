// hemips: render synthetic stacks, reconstruct normals and depth, and
// measure the reflectance and spectral claims.
//
// Exit codes: 0 success, 2 usage or input error, 1 numerical failure.

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>

#include "hemips/baselines.hpp"
#include "hemips/error.hpp"
#include "hemips/io.hpp"
#include "hemips/pipeline.hpp"

namespace fs = std::filesystem;
using namespace hemips;
using pipeline::PipelineConfig;

namespace {

// Flag overrides; only flags given on the command line touch the config.
struct Overrides {
  std::string config_file;
  nlohmann::json values = nlohmann::json::object();
  std::vector<std::function<void()>> collect;

  template <class T>
  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    auto value = std::make_shared<T>();
    CLI::Option* opt = app->add_option(flag, *value, help);
    collect.push_back([this, opt, value, key] {
      if (opt->count() > 0) values[key] = *value;
    });
  }

  PipelineConfig resolve() {
    for (auto& f : collect) f();
    PipelineConfig base;
    if (!config_file.empty()) {
      std::ifstream in(config_file);
      if (!in) throw InputError("config", "cannot open " + config_file);
      nlohmann::json j;
      try {
        in >> j;
      } catch (const nlohmann::json::exception& e) {
        throw InputError("config", std::string("malformed JSON: ") + e.what());
      }
      base = pipeline::config_from_json(j, base);
    }
    PipelineConfig c = pipeline::config_from_json(values, base);
    c.validate();
    return c;
  }
};

void add_config_flags(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config_file, "JSON configuration file")->check(CLI::ExistingFile);
  o.add<double>(app, "--k-fraction", "k_fraction", "neighbourhood size as a fraction of pixels");
  o.add<int>(app, "--k-cap", "k_cap", "upper bound on the neighbourhood size");
  o.add<double>(app, "--favor-threshold", "favor_threshold", "minimum reciprocated neighbour fraction");
  o.add<std::string>(app, "--row-sum", "row_sum_mode", "constant | inverse-r-squared");
  o.add<std::string>(app, "--chart", "chart_method", "pca | logmap");
  o.add<double>(app, "--boundary-fraction", "boundary_fraction", "fraction of pixels labelled equator");
  o.add<double>(app, "--z-floor", "z_floor", "smallest z kept when assembling normals");
  o.add<std::string>(app, "--convexity", "convexity", "convex | concave | auto");
  o.add<std::uint64_t>(app, "--seed", "seed", "seed for lights and noise");
  o.add<int>(app, "--resolution", "resolution", "synthetic image size in pixels");
  o.add<int>(app, "--lights", "lights", "number of synthetic lights");
  o.add<std::string>(app, "--render-mode", "render_mode", "exact | sh");
  o.add<std::string>(app, "--kernel", "kernel", "reflectance kernel preset for sh rendering");
  o.add<std::string>(app, "--albedo", "albedo", "uniform | checker");
  o.add<double>(app, "--noise", "noise_sigma", "additive Gaussian noise");
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw InputError("io", "cannot write " + p.string());
  out.precision(12);
  return out;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw InputError("io", "cannot create directory " + dir.string());
}

void write_json(const fs::path& p, const nlohmann::json& j) { open_out(p) << j.dump(2) << '\n'; }

int cmd_render(const PipelineConfig& c, const fs::path& out) {
  ensure_dir(out);
  const auto scene = pipeline::make_scene(c);
  const auto stack = pipeline::render_scene(scene, c);
  const auto names = io::write_stack(out, stack);
  io::write_pfm(out / "normals_truth.pfm", io::normals_image(scene.width, scene.height, scene.normals));
  write_json(out / "scene.json", {{"object", "sphere"},
                                  {"width", scene.width},
                                  {"height", scene.height},
                                  {"images", names},
                                  {"lights", "lights.csv"},
                                  {"mask", "mask.pgm"},
                                  {"normals_truth", "normals_truth.pfm"},
                                  {"config", pipeline::to_json(c)}});
  std::cout << "wrote " << names.size() << " images to " << out.string() << '\n';
  return 0;
}

int cmd_reconstruct(const PipelineConfig& c, const fs::path& in, const fs::path& out, bool edges) {
  const auto stack = io::read_stack(in);
  if (stack.images.size() < 3) throw InputError("io", "at least 3 images are required");
  ensure_dir(out);
  const auto r = pipeline::reconstruct_stack(stack, c);

  io::write_pfm(out / "normals.pfm", io::normals_image(stack.width, stack.height, r.normals.normals));
  io::FloatImage depth{stack.width, stack.height, 1, {}};
  for (double z : r.depth.depth) depth.data.push_back(static_cast<float>(z));
  io::write_pfm(out / "depth.pfm", depth);

  auto boundary = open_out(out / "boundary.csv");
  boundary << "x,y\n";
  for (int p : r.boundary_pixels) boundary << p % stack.width << ',' << p / stack.width << '\n';
  if (edges) {
    auto e = open_out(out / "edges.csv");
    graph::write_edge_csv(r.graph, e);
  }

  nlohmann::json report = pipeline::report_json(r, c);
  report["input"] = {{"directory", in.string()}, {"images", stack.images.size()}};
  if (fs::exists(in / "normals_truth.pfm")) {
    reconstruct::NormalField truth = r.normals;
    truth.normals = io::normals_from_image(io::read_pfm(in / "normals_truth.pfm"));
    if (truth.normals.size() == r.normals.normals.size())
      report["truth"] = {{"mean_angle_error_degrees", baselines::mean_angle_error(r.normals, truth)}};
  }
  write_json(out / "report.json", report);
  std::cout << "reconstructed " << r.active_pixels.size() << " pixels in " << r.total_seconds() << " s\n";
  return 0;
}

struct ClaimRow {
  std::string claim, quantity;
  double value, lower, upper;
};

void write_claims(const fs::path& p, const std::vector<ClaimRow>& rows) {
  auto out = open_out(p);
  out << "claim,quantity,value,lower,upper,pass\n";
  for (const auto& r : rows)
    out << r.claim << ',' << r.quantity << ',' << r.value << ',' << r.lower << ',' << r.upper << ','
        << (r.value >= r.lower && r.value <= r.upper ? 1 : 0) << '\n';
  for (const auto& r : rows)
    std::cout << r.claim << ' ' << r.quantity << " = " << r.value << "  [" << r.lower << ", " << r.upper << "]\n";
}

void eigen_claims(const PipelineConfig& c, int samples, int k, const fs::path& out, std::vector<ClaimRow>& rows) {
  const auto h = pipeline::hemisphere_spectrum(samples, k, c.row_sum_mode, c.boundary_fraction);
  auto series = open_out(out / "eigen_series.csv");
  series << "boundary,index,expected,scaled_expected,recovered,residual\n";
  for (const auto& [name, fit] : {std::pair{"dirichlet", &h.dirichlet}, std::pair{"neumann", &h.neumann}}) {
    for (Eigen::Index i = 0; i < fit->values.size(); ++i)
      series << name << ',' << i << ',' << fit->expected[i] << ',' << fit->scale * fit->expected[i] << ','
             << fit->values[i] << ',' << fit->residuals[i] << '\n';
    rows.push_back({"eigen-pattern", std::string(name) + "_max_residual", fit->max_residual, 0.0, 0.1});
  }
}

int cmd_verify_claims(const PipelineConfig& c, const fs::path& out, int mc_lights, int samples, int k, bool spectrum,
                      bool constant) {
  ensure_dir(out);
  std::vector<ClaimRow> rows;
  if (constant) {
    const auto lambert = sh::ReflectanceKernel::lambertian();
    const auto d = sh::predicted_distance_constant(lambert);
    const double pi = std::numbers::pi;
    const double c_ref = std::sqrt(109.0 / 127.0);
    rows.push_back({"distance-constant", "analytic_a", d.a, 127 * pi / 192 - 1e-10, 127 * pi / 192 + 1e-10});
    rows.push_back({"distance-constant", "analytic_b", d.b, 109 * pi / 192 - 1e-10, 109 * pi / 192 + 1e-10});
    rows.push_back({"distance-constant", "analytic_c", d.c, c_ref - 1e-10, c_ref + 1e-10});

    PipelineConfig mc = c;
    mc.lights = mc_lights;
    mc.render_mode = "exact";
    const auto scene = pipeline::make_scene(mc);
    const auto lights = render::sample_uniform_lights(mc_lights, mc.seed);
    rows.push_back({"distance-constant", "monte_carlo_exact_lambertian",
                    pipeline::neighbour_distance_ratio(pipeline::render_scene(scene, mc), scene).median, 0.91, 0.95});
    const auto harmonic = pipeline::kernel_distance_ratio(scene, lights, lambert);
    rows.push_back({"distance-constant", "monte_carlo_harmonic_lambertian", harmonic.median, 0.91, 0.95});
    rows.push_back({"distance-constant", "harmonic_fraction_within_0.93pm0.03", harmonic.fraction_within(0.90, 0.96),
                    0.9, 1.0});
    rows.push_back({"distance-constant", "monte_carlo_order1",
                    pipeline::kernel_distance_ratio(scene, lights, sh::ReflectanceKernel::preset("cosine-unclamped")).median,
                    0.98, 1.02});
  }
  if (spectrum) eigen_claims(c, samples, k, out, rows);
  write_claims(out / "claims.csv", rows);
  return 0;
}

int cmd_compare(const PipelineConfig& c, int seeds, bool exact, const std::string& out) {
  if (seeds < 1) throw InputError("cli", "--seeds must be at least 1");
  std::vector<baselines::ComparisonRow> rows;
  for (int s = 0; s < seeds; ++s) {
    PipelineConfig run = c;
    run.seed = c.seed + static_cast<std::uint64_t>(s);
    const auto r = pipeline::compare_embedders(run, exact);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  if (out.empty() || out == "-") {
    baselines::write_comparison_csv(rows, std::cout);
  } else {
    auto f = open_out(out);
    baselines::write_comparison_csv(rows, f);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Photometric stereo by hemisphere embedding of intensity vectors"};
  app.require_subcommand(1);
  Overrides o;
  std::function<int()> run;

  auto* render = app.add_subcommand("render", "render a synthetic sphere stack");
  add_config_flags(render, o);
  std::string render_out;
  render->add_option("-o,--out", render_out, "output directory")->required();
  render->callback([&] { run = [&] { return cmd_render(o.resolve(), render_out); }; });

  auto* rec = app.add_subcommand("reconstruct", "recover normals and depth from an image stack");
  add_config_flags(rec, o);
  std::string rec_in, rec_out;
  bool edges = false;
  rec->add_option("stack", rec_in, "image stack directory")->required()->check(CLI::ExistingDirectory);
  rec->add_option("-o,--out", rec_out, "output directory")->required();
  rec->add_flag("--edges", edges, "also write the neighbour graph as edges.csv");
  rec->callback([&] { run = [&] { return cmd_reconstruct(o.resolve(), rec_in, rec_out, edges); }; });

  int mc_lights = 2000, samples = 2000, k = 60;
  auto* claims = app.add_subcommand("verify-claims", "distance constant and eigenvalue pattern checks");
  add_config_flags(claims, o);
  std::string claims_out;
  claims->add_option("-o,--out", claims_out, "output directory")->required();
  claims->add_option("--mc-lights", mc_lights, "lights for the Monte-Carlo estimate")->check(CLI::PositiveNumber);
  claims->add_option("--samples", samples, "hemisphere samples for the eigenvalue check")->check(CLI::Range(50, 100000));
  claims->add_option("--k", k, "neighbours for the eigenvalue check")->check(CLI::Range(6, 500));
  claims->callback([&] {
    run = [&] { return cmd_verify_claims(o.resolve(), claims_out, mc_lights, samples, k, true, true); };
  });

  auto* eig = app.add_subcommand("eigencheck", "eigenvalue pattern check on exact hemisphere samples");
  add_config_flags(eig, o);
  std::string eig_out;
  eig->add_option("-o,--out", eig_out, "output directory")->required();
  eig->add_option("--samples", samples, "hemisphere samples")->check(CLI::Range(50, 100000));
  eig->add_option("--k", k, "neighbours")->check(CLI::Range(6, 500));
  eig->callback([&] { run = [&] { return cmd_verify_claims(o.resolve(), eig_out, 0, samples, k, true, false); }; });

  auto* cmp = app.add_subcommand("compare-embedders", "our embedding against Isomap, chordal Isomap and LLE");
  add_config_flags(cmp, o);
  int seeds = 5;
  bool exact = false;
  std::string cmp_out;
  cmp->add_option("--seeds", seeds, "number of consecutive seeds");
  cmp->add_flag("--exact-distances", exact, "Isomap variants use true arc lengths");
  cmp->add_option("-o,--out", cmp_out, "CSV file, stdout when omitted");
  cmp->callback([&] { run = [&] { return cmd_compare(o.resolve(), seeds, exact, cmp_out); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    return run();
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << '\n';
    return 1;
  }
}
