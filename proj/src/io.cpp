#include "bog/io.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "bog/errors.hpp"

namespace bog {

namespace {

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  return out;
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

bool is_skippable(const std::string& line) {
  const std::string t = trim(line);
  return t.empty() || t[0] == '#';
}

// Whitespace-separated token scanner over one line, reporting parse
// failures with the line number.
class TokenReader {
 public:
  TokenReader(const std::string& line, std::size_t line_no)
      : p_(line.data()), end_(line.data() + line.size()), line_no_(line_no) {}

  bool done() {
    skip_ws();
    return p_ == end_;
  }

  double next_double(const char* what) {
    skip_ws();
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(p_, end_, v);
    if (ec != std::errc{} || (ptr != end_ && !std::isspace(static_cast<unsigned char>(*ptr)))) {
      fail(what);
    }
    p_ = ptr;
    return v;
  }

  long long next_int(const char* what) {
    skip_ws();
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(p_, end_, v);
    if (ec != std::errc{} || (ptr != end_ && !std::isspace(static_cast<unsigned char>(*ptr)))) {
      fail(what);
    }
    p_ = ptr;
    return v;
  }

  std::string next_word(const char* what) {
    skip_ws();
    const char* start = p_;
    while (p_ != end_ && !std::isspace(static_cast<unsigned char>(*p_))) ++p_;
    if (p_ == start) fail(what);
    return std::string(start, p_);
  }

  [[noreturn]] void fail(const char* what) const {
    throw DataError("line " + std::to_string(line_no_) + ": expected " + what);
  }

  std::size_t line_no() const { return line_no_; }

 private:
  void skip_ws() {
    while (p_ != end_ && std::isspace(static_cast<unsigned char>(*p_))) ++p_;
  }

  const char* p_;
  const char* end_;
  std::size_t line_no_;
};

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(trim(cur));
  return fields;
}

long long parse_int_field(const std::string& s, std::size_t line_no, const char* what) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw DataError("line " + std::to_string(line_no) + ": bad " + what + " '" + s + "'");
  }
  return v;
}

double parse_double_field(const std::string& s, std::size_t line_no, const char* what) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw DataError("line " + std::to_string(line_no) + ": bad " + what + " '" + s + "'");
  }
  return v;
}

bool starts_with_digit(const std::string& s) {
  const std::string t = trim(s);
  return !t.empty() && (std::isdigit(static_cast<unsigned char>(t[0])) || t[0] == '-' || t[0] == '+');
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    double back = 0.0;
    std::from_chars(buf, buf + std::strlen(buf), back);
    if (back == v || (v != v && back != back)) break;
  }
  return buf;
}

// --- skeleton text -------------------------------------------------------

void save_sequence_text(const SkeletonSequence& seq, std::ostream& out) {
  for (const SkeletonFrame& f : seq.frames) {
    out << f.index;
    for (const Joint& j : f.joints) {
      out << ' ' << format_double(j.x) << ' ' << format_double(j.y) << ' ' << format_double(j.z);
    }
    out << '\n';
  }
}

void save_sequence_text(const SkeletonSequence& seq, const std::string& path) {
  auto out = open_output(path);
  save_sequence_text(seq, out);
}

SkeletonFrame parse_frame_line(const std::string& line, int joint_count, std::size_t line_no) {
  TokenReader tok(line, line_no);
  SkeletonFrame f;
  f.index = tok.next_int("frame index");
  f.joints.resize(joint_count);
  for (int j = 0; j < joint_count; ++j) {
    f.joints[j].x = tok.next_double("x coordinate");
    f.joints[j].y = tok.next_double("y coordinate");
    f.joints[j].z = tok.next_double("z coordinate");
  }
  if (!tok.done()) {
    throw DataError("line " + std::to_string(line_no) + ": trailing values (expected " +
                    std::to_string(1 + 3 * joint_count) + " per line)");
  }
  return f;
}

SkeletonSequence load_sequence_text(std::istream& in, int joint_count, double fps) {
  SkeletonSequence seq;
  seq.fps = fps;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_skippable(line)) continue;
    seq.frames.push_back(parse_frame_line(line, joint_count, line_no));
  }
  return seq;
}

SkeletonSequence load_sequence_text(const std::string& path, int joint_count, double fps) {
  auto in = open_input(path);
  try {
    return load_sequence_text(in, joint_count, fps);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

// --- dataset-native skeleton layout --------------------------------------

SkeletonSequence load_sequence_native(std::istream& in, int joint_count,
                                      const std::vector<int>& joint_map, double fps) {
  if (!joint_map.empty() && static_cast<int>(joint_map.size()) != joint_count) {
    throw DataError("joint_map size does not match joint count");
  }
  SkeletonSequence seq;
  seq.fps = fps;
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::array<double, 3>> rows;
  bool first_content_line = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_skippable(line)) continue;
    TokenReader tok(line, line_no);
    std::vector<double> vals;
    while (!tok.done()) vals.push_back(tok.next_double("coordinate"));
    if (first_content_line) {
      first_content_line = false;
      if (vals.size() == 2) continue;  // "n_frames n_values" header
    }
    if (vals.size() != 3 && vals.size() != 4) {
      throw DataError("line " + std::to_string(line_no) +
                      ": expected 'x y z' or 'x y z conf', got " + std::to_string(vals.size()) +
                      " values");
    }
    rows.push_back({vals[0], vals[1], vals[2]});
    if (rows.size() == static_cast<std::size_t>(joint_count)) {
      SkeletonFrame f;
      f.index = static_cast<FrameIndex>(seq.frames.size());
      f.joints.resize(joint_count);
      for (int r = 0; r < joint_count; ++r) {
        const int target = joint_map.empty() ? r : joint_map[r];
        if (target < 0 || target >= joint_count) throw DataError("joint_map entry out of range");
        f.joints[target] = {rows[r][0], rows[r][1], rows[r][2]};
      }
      seq.frames.push_back(std::move(f));
      rows.clear();
    }
  }
  if (!rows.empty()) {
    throw DataError("truncated file: " + std::to_string(rows.size()) +
                    " joint rows after the last complete frame");
  }
  return seq;
}

SkeletonSequence load_sequence_native(const std::string& path, int joint_count,
                                      const std::vector<int>& joint_map, double fps) {
  auto in = open_input(path);
  try {
    return load_sequence_native(in, joint_count, joint_map, fps);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

// --- annotations ----------------------------------------------------------

void save_annotations_csv(const std::vector<Annotation>& annotations, std::ostream& out) {
  for (const Annotation& a : annotations) {
    out << a.class_id << ',' << a.start_frame << ',' << a.end_frame << ',';
    if (a.action_point) out << *a.action_point;
    out << '\n';
  }
}

void save_annotations_csv(const std::vector<Annotation>& annotations, const std::string& path) {
  auto out = open_output(path);
  save_annotations_csv(annotations, out);
}

std::vector<Annotation> load_annotations_csv(std::istream& in) {
  std::vector<Annotation> anns;
  std::string line;
  std::size_t line_no = 0;
  bool first_content_line = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_skippable(line)) continue;
    if (first_content_line) {
      first_content_line = false;
      if (!starts_with_digit(line)) continue;  // header row
    }
    const std::vector<std::string> f = split_csv(line);
    if (f.size() != 3 && f.size() != 4) {
      throw DataError("line " + std::to_string(line_no) + ": expected 3 or 4 fields, got " +
                      std::to_string(f.size()));
    }
    Annotation a;
    a.class_id = static_cast<int>(parse_int_field(f[0], line_no, "class_id"));
    a.start_frame = parse_int_field(f[1], line_no, "start_frame");
    a.end_frame = parse_int_field(f[2], line_no, "end_frame");
    if (f.size() == 4 && !f[3].empty()) {
      a.action_point = parse_int_field(f[3], line_no, "action_point");
    }
    if (!annotation_valid(a)) {
      throw DataError("line " + std::to_string(line_no) + ": invalid annotation");
    }
    anns.push_back(a);
  }
  std::sort(anns.begin(), anns.end(),
            [](const Annotation& a, const Annotation& b) { return a.start_frame < b.start_frame; });
  return anns;
}

std::vector<Annotation> load_annotations_csv(const std::string& path) {
  auto in = open_input(path);
  try {
    return load_annotations_csv(in);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

std::vector<Annotation> start_frames_as_action_points(std::vector<Annotation> annotations) {
  for (Annotation& a : annotations) a.action_point = a.start_frame;
  return annotations;
}

// --- topology --------------------------------------------------------------

void save_topology(const SkeletonTopology& topo, std::ostream& out) {
  for (const std::string& name : topo.joint_names) out << "joint " << name << '\n';
  out << "reference " << topo.joint_names[topo.reference_joint] << '\n';
  for (const AngleTriplet& t : topo.angle_triplets) {
    out << "triplet " << topo.joint_names[t.a] << ' ' << topo.joint_names[t.vertex] << ' '
        << topo.joint_names[t.b] << '\n';
  }
}

void save_topology(const SkeletonTopology& topo, const std::string& path) {
  auto out = open_output(path);
  save_topology(topo, out);
}

SkeletonTopology load_topology(std::istream& in) {
  SkeletonTopology topo;
  topo.reference_joint = -1;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_skippable(line)) continue;
    TokenReader tok(line, line_no);
    const std::string directive = tok.next_word("directive");
    auto joint_of = [&](const std::string& name) {
      const int idx = topo.joint_index(name);
      if (idx < 0) {
        throw DataError("line " + std::to_string(line_no) + ": unknown joint '" + name + "'");
      }
      return idx;
    };
    if (directive == "joint") {
      topo.joint_names.push_back(tok.next_word("joint name"));
    } else if (directive == "reference") {
      topo.reference_joint = joint_of(tok.next_word("joint name"));
    } else if (directive == "triplet") {
      AngleTriplet t;
      t.a = joint_of(tok.next_word("joint name"));
      t.vertex = joint_of(tok.next_word("joint name"));
      t.b = joint_of(tok.next_word("joint name"));
      topo.angle_triplets.push_back(t);
    } else {
      throw DataError("line " + std::to_string(line_no) + ": unknown directive '" + directive +
                      "'");
    }
    if (!tok.done()) throw DataError("line " + std::to_string(line_no) + ": trailing tokens");
  }
  if (topo.reference_joint < 0) throw DataError("topology file has no reference joint");
  const ValidationResult v = validate_topology(topo);
  if (!v.ok()) throw DataError("invalid topology: " + v.violations.front().message);
  return topo;
}

SkeletonTopology load_topology(const std::string& path) {
  auto in = open_input(path);
  try {
    return load_topology(in);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

// --- codebook ---------------------------------------------------------------

void save_codebook(const Codebook& cb, std::ostream& out) {
  out << cb.dim << ' ' << cb.size() << ' ' << cb.seed << ' ' << format_double(cb.subsample_rate)
      << '\n';
  for (const Vector& c : cb.centroids) {
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (i) out << ' ';
      out << format_double(c[i]);
    }
    out << '\n';
  }
}

void save_codebook(const Codebook& cb, const std::string& path) {
  auto out = open_output(path);
  save_codebook(cb, out);
}

Codebook load_codebook(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  Codebook cb;
  long long k = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_skippable(line)) continue;
    TokenReader tok(line, line_no);
    if (!have_header) {
      cb.dim = static_cast<int>(tok.next_int("dim"));
      k = tok.next_int("k");
      cb.seed = static_cast<std::uint64_t>(tok.next_int("seed"));
      cb.subsample_rate = tok.next_double("subsample rate");
      if (!tok.done()) tok.fail("end of header");
      if (cb.dim < 1 || k < 2) throw DataError("codebook header out of range");
      have_header = true;
      continue;
    }
    Vector c(cb.dim);
    for (int i = 0; i < cb.dim; ++i) c[i] = tok.next_double("centroid value");
    if (!tok.done()) tok.fail("end of centroid row");
    cb.centroids.push_back(std::move(c));
  }
  if (!have_header) throw DataError("empty codebook file");
  if (static_cast<long long>(cb.centroids.size()) != k) {
    throw DataError("codebook row count " + std::to_string(cb.centroids.size()) +
                    " does not match header k " + std::to_string(k));
  }
  return cb;
}

Codebook load_codebook(const std::string& path) {
  auto in = open_input(path);
  try {
    return load_codebook(in);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

// --- class model -------------------------------------------------------------

void save_model(const ClassModel& model, std::ostream& out) {
  out << model.class_id << ' ' << model.k() << ' ' << format_double(model.threshold) << ' '
      << format_double(model.bias) << '\n';
  for (double w : model.weights) out << format_double(w) << '\n';
}

void save_model(const ClassModel& model, const std::string& path) {
  auto out = open_output(path);
  save_model(model, out);
}

ClassModel load_model(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  ClassModel m;
  long long k = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_skippable(line)) continue;
    TokenReader tok(line, line_no);
    if (k < 0) {
      m.class_id = static_cast<int>(tok.next_int("class_id"));
      k = tok.next_int("k");
      m.threshold = tok.next_double("threshold");
      m.bias = tok.next_double("bias");
      if (!tok.done()) tok.fail("end of header");
      if (k < 1) throw DataError("model header k out of range");
      m.weights.reserve(k);
      continue;
    }
    m.weights.push_back(tok.next_double("weight"));
    if (!tok.done()) tok.fail("one weight per line");
  }
  if (k < 0) throw DataError("empty model file");
  if (static_cast<long long>(m.weights.size()) != k) {
    throw DataError("model weight count " + std::to_string(m.weights.size()) +
                    " does not match header k " + std::to_string(k));
  }
  return m;
}

ClassModel load_model(const std::string& path) {
  auto in = open_input(path);
  try {
    return load_model(in);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

// --- detections ---------------------------------------------------------------

void save_detections_csv(const std::vector<DetectionEvent>& events, std::ostream& out) {
  out << "class_id,start_frame,end_frame,trigger_frame,score\n";
  for (const DetectionEvent& e : events) {
    out << e.class_id << ',' << e.start_frame << ',' << e.end_frame << ',' << e.trigger_frame
        << ',' << format_double(e.score) << '\n';
  }
}

void save_detections_csv(const std::vector<DetectionEvent>& events, const std::string& path) {
  auto out = open_output(path);
  save_detections_csv(events, out);
}

std::vector<DetectionEvent> load_detections_csv(std::istream& in) {
  std::vector<DetectionEvent> events;
  std::string line;
  std::size_t line_no = 0;
  bool first_content_line = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_skippable(line)) continue;
    if (first_content_line) {
      first_content_line = false;
      if (!starts_with_digit(line)) continue;  // header row
    }
    const std::vector<std::string> f = split_csv(line);
    if (f.size() != 5) {
      throw DataError("line " + std::to_string(line_no) + ": expected 5 fields, got " +
                      std::to_string(f.size()));
    }
    DetectionEvent e;
    e.class_id = static_cast<int>(parse_int_field(f[0], line_no, "class_id"));
    e.start_frame = parse_int_field(f[1], line_no, "start_frame");
    e.end_frame = parse_int_field(f[2], line_no, "end_frame");
    e.trigger_frame = parse_int_field(f[3], line_no, "trigger_frame");
    e.score = parse_double_field(f[4], line_no, "score");
    events.push_back(e);
  }
  return events;
}

std::vector<DetectionEvent> load_detections_csv(const std::string& path) {
  auto in = open_input(path);
  try {
    return load_detections_csv(in);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

// --- descriptor dump ------------------------------------------------------------

void save_descriptors(const std::vector<GestureletDescriptor>& descriptors, std::ostream& out) {
  for (const GestureletDescriptor& d : descriptors) {
    out << d.frame_index;
    for (double v : d.values) out << ' ' << format_double(v);
    out << '\n';
  }
}

void save_descriptors(const std::vector<GestureletDescriptor>& descriptors,
                      const std::string& path) {
  auto out = open_output(path);
  save_descriptors(descriptors, out);
}

// --- config ------------------------------------------------------------------

std::map<std::string, std::string> load_config_file(std::istream& in) {
  std::map<std::string, std::string> cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_skippable(line)) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw DataError("line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw DataError("line " + std::to_string(line_no) + ": empty key");
    cfg[key] = value;
  }
  return cfg;
}

std::map<std::string, std::string> load_config_file(const std::string& path) {
  auto in = open_input(path);
  try {
    return load_config_file(in);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

}  // namespace bog
