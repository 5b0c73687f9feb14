#include "mcvl/io.hpp"

#include <json.hpp>

#include <fstream>
#include <iomanip>
#include <sstream>

namespace mcvl::io {

namespace {

constexpr char kTrajMagic[] = "# mcvl trajectory v1";
constexpr char kDescMagic[8] = {'M', 'C', 'V', 'L', 'D', 'S', 'C', '1'};
constexpr char kCodebookMagic[8] = {'M', 'C', 'V', 'L', 'C', 'B', 'K', '1'};
constexpr char kDatabaseMagic[8] = {'M', 'C', 'V', 'L', 'M', 'D', 'B', '1'};

std::ofstream open_out(const std::filesystem::path& path, bool binary) {
  std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
  if (!os) throw FormatError("cannot open for writing: " + path.string());
  return os;
}

std::ifstream open_in(const std::filesystem::path& path, bool binary) {
  std::ifstream is(path, binary ? std::ios::binary : std::ios::in);
  if (!is) throw FormatError("cannot open for reading: " + path.string());
  return is;
}

template <typename T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw FormatError("truncated file");
  return v;
}

void put_floats(std::ostream& os, const float* data, std::size_t n) {
  os.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * sizeof(float)));
}

void get_floats(std::istream& is, float* data, std::size_t n) {
  is.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(n * sizeof(float)));
  if (!is) throw FormatError("truncated float block");
}

void check_magic(std::istream& is, const char (&magic)[8], const char* what) {
  char buf[8];
  is.read(buf, 8);
  if (!is || !std::equal(buf, buf + 8, magic)) {
    throw FormatError(std::string("bad magic, not a ") + what + " file");
  }
}

}  // namespace

std::uint64_t fnv1a64(const void* data, std::size_t size) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::uint64_t file_hash(const std::filesystem::path& path) {
  std::ifstream is = open_in(path, true);
  std::ostringstream buf;
  buf << is.rdbuf();
  const std::string s = buf.str();
  return fnv1a64(s.data(), s.size());
}

void write_trajectory(const std::filesystem::path& path, const Trajectory& traj) {
  if (traj.times.size() != traj.poses.size()) {
    throw FormatError("write_trajectory: times/poses size mismatch");
  }
  std::ofstream os = open_out(path, false);
  os << kTrajMagic << "\n# t x y z roll pitch yaw\n";
  os << std::setprecision(17);
  for (std::size_t i = 0; i < traj.poses.size(); ++i) {
    const auto& p = traj.poses[i];
    os << traj.times[i] << ' ' << p.position.x() << ' ' << p.position.y() << ' '
       << p.position.z() << ' ' << p.orientation[0] << ' ' << p.orientation[1]
       << ' ' << p.orientation[2] << '\n';
  }
}

Trajectory read_trajectory(const std::filesystem::path& path) {
  std::ifstream is = open_in(path, false);
  Trajectory traj;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    double t, x, y, z, roll, pitch, yaw;
    if (!(ls >> t)) continue;  // blank or comment-only line
    if (!(ls >> x >> y >> z >> roll >> pitch >> yaw)) {
      throw FormatError("trajectory parse error at line " + std::to_string(lineno));
    }
    traj.times.push_back(t);
    traj.poses.push_back({{x, y, z}, {roll, pitch, yaw}});
  }
  return traj;
}

void write_pgm(const std::filesystem::path& path, const features::GrayImage& img) {
  std::ofstream os = open_out(path, true);
  os << "P5\n" << img.width << ' ' << img.height << "\n255\n";
  std::vector<unsigned char> row(static_cast<std::size_t>(img.width));
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const float v = std::clamp(img.at(x, y), 0.0f, 1.0f);
      row[static_cast<std::size_t>(x)] = static_cast<unsigned char>(std::lround(v * 255.0f));
    }
    os.write(reinterpret_cast<const char*>(row.data()), img.width);
  }
}

features::GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream is = open_in(path, true);
  std::string magic;
  is >> magic;
  if (magic != "P5") throw FormatError("read_pgm: not a P5 PGM file");
  int width = 0, height = 0, maxval = 0;
  // PGM allows comment lines between header tokens.
  auto next_int = [&](int& out) {
    std::string tok;
    while (is >> tok) {
      if (tok[0] == '#') {
        std::string rest;
        std::getline(is, rest);
        continue;
      }
      out = std::stoi(tok);
      return;
    }
    throw FormatError("read_pgm: truncated header");
  };
  next_int(width);
  next_int(height);
  next_int(maxval);
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 255) {
    throw FormatError("read_pgm: unsupported header");
  }
  is.get();  // single whitespace after maxval
  features::GrayImage img;
  img.width = width;
  img.height = height;
  img.pixels.resize(static_cast<std::size_t>(width) * height);
  std::vector<unsigned char> raw(img.pixels.size());
  is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!is) throw FormatError("read_pgm: truncated pixel data");
  for (std::size_t i = 0; i < raw.size(); ++i) {
    img.pixels[i] = static_cast<float>(raw[i]) / static_cast<float>(maxval);
  }
  return img;
}

void write_descriptor_set(const std::filesystem::path& path,
                          const features::DescriptorSet& ds) {
  std::ofstream os = open_out(path, true);
  os.write(kDescMagic, 8);
  put<std::uint64_t>(os, ds.count());
  put<std::uint64_t>(os, ds.dim);
  put_floats(os, ds.data.data(), ds.data.size());
  for (const auto& kp : ds.keypoints) {
    put(os, kp.x);
    put(os, kp.y);
    put(os, kp.scale);
  }
}

features::DescriptorSet read_descriptor_set(const std::filesystem::path& path) {
  std::ifstream is = open_in(path, true);
  check_magic(is, kDescMagic, "descriptor-set");
  const auto m = get<std::uint64_t>(is);
  const auto d = get<std::uint64_t>(is);
  features::DescriptorSet ds;
  ds.dim = d;
  ds.data.resize(m * d);
  get_floats(is, ds.data.data(), ds.data.size());
  ds.keypoints.resize(m);
  for (auto& kp : ds.keypoints) {
    kp.x = get<float>(is);
    kp.y = get<float>(is);
    kp.scale = get<float>(is);
  }
  return ds;
}

void write_codebook(const std::filesystem::path& path, const encoder::Codebook& cb) {
  const auto& voc = cb.vocabulary;
  const auto& pca = cb.pca;
  std::ofstream os = open_out(path, true);
  os.write(kCodebookMagic, 8);
  put<std::uint32_t>(os, 1);  // version
  put<std::uint32_t>(os, static_cast<std::uint32_t>(voc.k));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(voc.dim));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(pca.output_dim()));
  put_floats(os, voc.centers.data(), voc.centers.size());
  const std::size_t big_d = pca.input_dim();
  std::vector<float> buf(big_d);
  for (std::size_t i = 0; i < big_d; ++i) buf[i] = static_cast<float>(pca.mean[i]);
  put_floats(os, buf.data(), big_d);
  for (std::size_t j = 0; j < pca.output_dim(); ++j) {
    for (std::size_t i = 0; i < big_d; ++i) {
      buf[i] = static_cast<float>(pca.basis(static_cast<Eigen::Index>(i),
                                            static_cast<Eigen::Index>(j)));
    }
    put_floats(os, buf.data(), big_d);
  }
  buf.resize(pca.output_dim());
  for (std::size_t j = 0; j < pca.output_dim(); ++j) {
    buf[j] = static_cast<float>(pca.scale[j]);
  }
  put_floats(os, buf.data(), buf.size());
}

encoder::Codebook read_codebook(const std::filesystem::path& path) {
  std::ifstream is = open_in(path, true);
  check_magic(is, kCodebookMagic, "codebook");
  const auto version = get<std::uint32_t>(is);
  if (version != 1) throw FormatError("codebook: unsupported version");
  const auto k = get<std::uint32_t>(is);
  const auto d = get<std::uint32_t>(is);
  const auto p = get<std::uint32_t>(is);
  encoder::Codebook cb;
  cb.vocabulary.k = k;
  cb.vocabulary.dim = d;
  cb.vocabulary.centers.resize(static_cast<std::size_t>(k) * d);
  get_floats(is, cb.vocabulary.centers.data(), cb.vocabulary.centers.size());
  const std::size_t big_d = static_cast<std::size_t>(k) * d;
  std::vector<float> buf(big_d);
  get_floats(is, buf.data(), big_d);
  cb.pca.mean.resize(static_cast<Eigen::Index>(big_d));
  for (std::size_t i = 0; i < big_d; ++i) cb.pca.mean[i] = buf[i];
  cb.pca.basis.resize(static_cast<Eigen::Index>(big_d), p);
  for (std::uint32_t j = 0; j < p; ++j) {
    get_floats(is, buf.data(), big_d);
    for (std::size_t i = 0; i < big_d; ++i) {
      cb.pca.basis(static_cast<Eigen::Index>(i), j) = buf[i];
    }
  }
  buf.resize(p);
  get_floats(is, buf.data(), p);
  cb.pca.scale.resize(p);
  for (std::uint32_t j = 0; j < p; ++j) cb.pca.scale[j] = buf[j];
  return cb;
}

void write_database(const std::filesystem::path& path, const retrieval::MapDatabase& db) {
  std::ofstream os = open_out(path, true);
  os.write(kDatabaseMagic, 8);
  put<std::uint32_t>(os, 1);  // version
  put<std::uint64_t>(os, db.entries.size());
  put<std::uint64_t>(os, db.codebook_hash);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(db.descriptor_dim()));
  for (const auto& e : db.entries) {
    put_floats(os, e.descriptor.data(), e.descriptor.size());
    for (int i = 0; i < 3; ++i) put<double>(os, e.pose.position[i]);
    for (int i = 0; i < 3; ++i) put<double>(os, e.pose.orientation[i]);
    put<std::uint32_t>(os, e.sequence_id);
    put<std::uint32_t>(os, e.frame_id);
  }
}

retrieval::MapDatabase read_database(const std::filesystem::path& path) {
  std::ifstream is = open_in(path, true);
  check_magic(is, kDatabaseMagic, "map-database");
  const auto version = get<std::uint32_t>(is);
  if (version != 1) throw FormatError("database: unsupported version");
  const auto count = get<std::uint64_t>(is);
  retrieval::MapDatabase db;
  db.codebook_hash = get<std::uint64_t>(is);
  const auto dim = get<std::uint32_t>(is);
  db.entries.resize(count);
  for (auto& e : db.entries) {
    e.descriptor.resize(dim);
    get_floats(is, e.descriptor.data(), dim);
    for (int i = 0; i < 3; ++i) e.pose.position[i] = get<double>(is);
    for (int i = 0; i < 3; ++i) e.pose.orientation[i] = get<double>(is);
    e.sequence_id = get<std::uint32_t>(is);
    e.frame_id = get<std::uint32_t>(is);
  }
  return db;
}

std::string step_record_json(const filter::StepRecord& rec) {
  nlohmann::json j;
  j["step"] = rec.step;
  j["has_measurement"] = rec.has_measurement;
  if (rec.has_measurement) {
    j["measurement"] = {rec.measurement.position.x(), rec.measurement.position.y(),
                        rec.measurement.position.z(), rec.measurement.orientation[0],
                        rec.measurement.orientation[1], rec.measurement.orientation[2]};
    j["support"] = rec.support;
  }
  j["n_eff"] = rec.n_eff;
  j["estimate"] = {rec.estimate.position.x(), rec.estimate.position.y(),
                   rec.estimate.position.z(), rec.estimate.orientation[0],
                   rec.estimate.orientation[1], rec.estimate.orientation[2]};
  j["spread"] = rec.spread;
  return j.dump();
}

}  // namespace mcvl::io
