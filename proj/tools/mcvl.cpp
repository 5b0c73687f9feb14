// mcvl: Monte Carlo visual localization toolkit CLI.

#include "mcvl/config.hpp"
#include "mcvl/eval.hpp"
#include "mcvl/io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

namespace fs = std::filesystem;
using namespace mcvl;

namespace {

std::vector<fs::path> list_pgms(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".pgm") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    throw std::runtime_error("no .pgm images in " + dir.string());
  }
  return files;
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << content;
}

int cmd_simulate(const fs::path& scenario_path, const fs::path& out_dir) {
  const simworld::ScenarioConfig cfg = config::parse_scenario(scenario_path);
  const simworld::Scenario sc = simworld::build_scenario(cfg);
  fs::create_directories(out_dir);

  auto emit = [&](const simworld::Traversal& t) {
    const fs::path dir = out_dir / t.name;
    fs::create_directories(dir);
    io::Trajectory traj;
    for (std::size_t i = 0; i < t.poses.size(); ++i) {
      const features::GrayImage img = simworld::render(
          t.poses[i], cfg.seed, t.condition, cfg.image_width, cfg.image_height);
      char name[32];
      std::snprintf(name, sizeof(name), "%06zu.pgm", i);
      io::write_pgm(dir / name, img);
      traj.times.push_back(static_cast<double>(i) * cfg.dt);
      traj.poses.push_back(t.poses[i]);
    }
    io::write_trajectory(dir / "poses.traj", traj);
    std::cout << "wrote " << t.poses.size() << " frames to " << dir << '\n';
  };
  for (const auto& t : sc.training) emit(t);
  emit(sc.test);
  write_text(out_dir / "manifest.txt", config::scenario_manifest(sc));
  config::write_scenario(out_dir / "scenario.cfg", cfg);
  return 0;
}

int cmd_train_codebook(const std::vector<fs::path>& image_dirs, const fs::path& out,
                       std::size_t k, std::size_t pca_dims, std::uint64_t seed,
                       std::size_t sample_size) {
  encoder::Codebook cb;

  std::vector<features::DescriptorSet> all_sets;
  for (const auto& dir : image_dirs) {
    for (const auto& file : list_pgms(dir)) {
      features::DescriptorSet ds =
          features::extract_dense(io::read_pgm(file), cb.feature_config);
      features::root_sift_inplace(ds);
      all_sets.push_back(std::move(ds));
    }
  }
  std::cout << "extracted descriptors from " << all_sets.size() << " images\n";

  // Uniform sample of descriptors for vocabulary training.
  std::size_t total = 0;
  for (const auto& ds : all_sets) total += ds.count();
  const std::size_t dim = all_sets[0].dim;
  std::mt19937_64 rng(seed);
  std::vector<float> pool;
  std::size_t pool_count = 0;
  if (total <= sample_size) {
    for (const auto& ds : all_sets) pool.insert(pool.end(), ds.data.begin(), ds.data.end());
    pool_count = total;
  } else {
    std::uniform_int_distribution<std::size_t> pick(0, total - 1);
    std::vector<std::size_t> offsets(all_sets.size() + 1, 0);
    for (std::size_t i = 0; i < all_sets.size(); ++i) {
      offsets[i + 1] = offsets[i] + all_sets[i].count();
    }
    for (std::size_t s = 0; s < sample_size; ++s) {
      const std::size_t g = pick(rng);
      const std::size_t img_idx =
          static_cast<std::size_t>(std::upper_bound(offsets.begin(), offsets.end(), g) -
                                   offsets.begin()) - 1;
      const float* row = all_sets[img_idx].row(g - offsets[img_idx]);
      pool.insert(pool.end(), row, row + dim);
    }
    pool_count = sample_size;
  }
  cb.vocabulary = encoder::train_vocabulary(pool, pool_count, dim, k, seed);
  std::cout << "trained vocabulary, k = " << k << '\n';

  std::vector<std::vector<float>> raws;
  raws.reserve(all_sets.size());
  for (const auto& ds : all_sets) {
    raws.push_back(encoder::embed_vlad(ds, cb.vocabulary));
  }
  cb.pca = encoder::train_pca(raws, pca_dims);
  if (cb.pca.output_dim() < pca_dims) {
    std::cout << "pca dims clamped from " << pca_dims << " to "
              << cb.pca.output_dim() << " (available rank)\n";
  }
  io::write_codebook(out, cb);
  std::cout << "wrote codebook to " << out << '\n';
  return 0;
}

int cmd_build_db(const std::vector<fs::path>& image_dirs,
                 const std::vector<fs::path>& pose_files, const fs::path& codebook_path,
                 const fs::path& out) {
  if (image_dirs.size() != pose_files.size()) {
    throw std::runtime_error("--images and --poses must be paired");
  }
  const encoder::Codebook cb = io::read_codebook(codebook_path);
  retrieval::MapDatabase db;
  db.codebook_hash = io::file_hash(codebook_path);
  for (std::size_t s = 0; s < image_dirs.size(); ++s) {
    const auto files = list_pgms(image_dirs[s]);
    const io::Trajectory traj = io::read_trajectory(pose_files[s]);
    if (files.size() != traj.poses.size()) {
      throw std::runtime_error("image/pose count mismatch for " +
                               image_dirs[s].string());
    }
    for (std::size_t i = 0; i < files.size(); ++i) {
      retrieval::MapEntry e;
      e.descriptor = encoder::encode(io::read_pgm(files[i]), cb).values;
      e.pose = traj.poses[i];
      e.sequence_id = static_cast<std::uint32_t>(s);
      e.frame_id = static_cast<std::uint32_t>(i);
      db.entries.push_back(std::move(e));
    }
    std::cout << "encoded sequence " << s << " (" << files.size() << " images)\n";
  }
  io::write_database(out, db);
  std::cout << "wrote database with " << db.entries.size() << " entries to " << out << '\n';
  return 0;
}

int cmd_localize(const fs::path& db_path, const fs::path& codebook_path,
                 const fs::path& images_dir, const fs::path& config_path,
                 const std::string& mode, const fs::path& out,
                 const fs::path& log_path) {
  const retrieval::MapDatabase db = io::read_database(db_path);
  const encoder::Codebook cb = io::read_codebook(codebook_path);
  if (db.codebook_hash != io::file_hash(codebook_path)) {
    std::cerr << "warning: codebook hash does not match the database\n";
  }
  config::LocalizerConfig cfg;
  if (!config_path.empty()) cfg = config::parse_localizer_config(config_path);

  const auto files = list_pgms(images_dir);
  std::ofstream log;
  if (!log_path.empty()) {
    log.open(log_path);
    if (!log) throw std::runtime_error("cannot write log " + log_path.string());
  }

  io::Trajectory traj;
  if (mode == "retrieval") {
    for (std::size_t i = 0; i < files.size(); ++i) {
      const auto q = encoder::encode(io::read_pgm(files[i]), cb);
      const auto z = retrieval::measure(db, q, cfg.filter.retrieval);
      traj.times.push_back(static_cast<double>(i));
      traj.poses.push_back(z.pose);
    }
  } else if (mode == "filter") {
    filter::Rng rng(cfg.seed);
    const auto q0 = encoder::encode(io::read_pgm(files[0]), cb);
    const auto z0 = retrieval::measure(db, q0, cfg.filter.retrieval);
    filter::ParticleSet ps = filter::init(z0, cfg.filter, rng);
    traj.times.push_back(0.0);
    traj.poses.push_back(filter::estimate(ps));
    for (std::size_t i = 1; i < files.size(); ++i) {
      const filter::StepRecord rec = filter::step(
          ps, io::read_pgm(files[i]), db, cb, cfg.filter, rng, i);
      if (log.is_open()) log << io::step_record_json(rec) << '\n';
      traj.times.push_back(static_cast<double>(i));
      traj.poses.push_back(rec.estimate);
    }
  } else {
    throw std::runtime_error("mode must be retrieval or filter");
  }
  io::write_trajectory(out, traj);
  std::cout << "wrote " << traj.poses.size() << " estimates to " << out << '\n';
  return 0;
}

int cmd_eval(const std::vector<std::string>& est_specs, const fs::path& gt_path,
             const fs::path& out, const fs::path& plot_path) {
  const io::Trajectory gt = io::read_trajectory(gt_path);
  std::vector<eval::NamedReport> reports;
  std::vector<io::Trajectory> ests;
  for (const auto& spec : est_specs) {
    std::string name = "est" + std::to_string(reports.size());
    std::string path = spec;
    const auto eq = spec.find('=');
    if (eq != std::string::npos) {
      name = spec.substr(0, eq);
      path = spec.substr(eq + 1);
    }
    io::Trajectory est = io::read_trajectory(path);
    reports.push_back({name, eval::score(est.poses, gt.poses)});
    ests.push_back(std::move(est));
  }
  if (reports.size() == 1) {
    write_text(out, eval::report_csv(reports[0].report));
  } else {
    const std::string table = eval::compare(reports);
    std::cout << table;
    write_text(out, table);
  }
  if (!plot_path.empty()) {
    write_text(plot_path, eval::trajectory_svg(gt.poses, ests[0].poses));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo visual localization toolkit"};
  app.require_subcommand(1);

  // simulate
  fs::path scenario_path, sim_out;
  auto* sim = app.add_subcommand("simulate", "generate a procedural scenario");
  sim->add_option("--scenario", scenario_path, "scenario config file")->required();
  sim->add_option("--out", sim_out, "output directory")->required();

  // train-codebook
  std::vector<fs::path> cb_dirs;
  fs::path cb_out;
  std::size_t cb_k = 128, cb_p = 4096, cb_sample = 20000;
  std::uint64_t cb_seed = 1;
  auto* tcb = app.add_subcommand("train-codebook", "train vocabulary and PCA model");
  tcb->add_option("--images", cb_dirs, "image directories")->required();
  tcb->add_option("--out", cb_out, "output codebook file")->required();
  tcb->add_option("--k", cb_k, "vocabulary size");
  tcb->add_option("--pca-dims", cb_p, "PCA output dims (auto-clamped to rank)");
  tcb->add_option("--seed", cb_seed, "training seed");
  tcb->add_option("--sample", cb_sample, "descriptor sample size for k-means");

  // build-db
  std::vector<fs::path> db_dirs, db_poses;
  fs::path db_codebook, db_out;
  auto* bdb = app.add_subcommand("build-db", "encode map images into a database");
  bdb->add_option("--images", db_dirs, "image directories")->required();
  bdb->add_option("--poses", db_poses, "trajectory file per image directory")->required();
  bdb->add_option("--codebook", db_codebook, "codebook file")->required();
  bdb->add_option("--out", db_out, "output database file")->required();

  // localize
  fs::path loc_db, loc_cb, loc_images, loc_cfg, loc_out, loc_log;
  std::string loc_mode = "filter";
  auto* loc = app.add_subcommand("localize", "localize a query sequence");
  loc->add_option("--db", loc_db, "map database")->required();
  loc->add_option("--codebook", loc_cb, "codebook file")->required();
  loc->add_option("--images", loc_images, "query image directory")->required();
  loc->add_option("--config", loc_cfg, "localizer config file");
  loc->add_option("--mode", loc_mode, "retrieval or filter");
  loc->add_option("--out", loc_out, "output trajectory")->required();
  loc->add_option("--log", loc_log, "per-step JSON-lines log (filter mode)");

  // eval
  std::vector<std::string> ev_est;
  fs::path ev_gt, ev_out, ev_plot;
  auto* ev = app.add_subcommand("eval", "score estimates against ground truth");
  ev->add_option("--est", ev_est, "estimate trajectory, optionally name=path")->required();
  ev->add_option("--gt", ev_gt, "ground-truth trajectory")->required();
  ev->add_option("--out", ev_out, "report output (CSV, or table for multiple --est)")->required();
  ev->add_option("--plot", ev_plot, "SVG overlay of ground truth vs first estimate");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(scenario_path, sim_out);
    if (tcb->parsed()) return cmd_train_codebook(cb_dirs, cb_out, cb_k, cb_p, cb_seed, cb_sample);
    if (bdb->parsed()) return cmd_build_db(db_dirs, db_poses, db_codebook, db_out);
    if (loc->parsed()) {
      return cmd_localize(loc_db, loc_cb, loc_images, loc_cfg, loc_mode, loc_out, loc_log);
    }
    if (ev->parsed()) return cmd_eval(ev_est, ev_gt, ev_out, ev_plot);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
