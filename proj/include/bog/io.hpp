#pragma once

#include <iosfwd>
#include <map>
#include <string>

#include "bog/classifier.hpp"
#include "bog/codebook.hpp"
#include "bog/descriptor.hpp"
#include "bog/skeleton.hpp"

namespace bog {

/// Skeleton text: one frame per line,
///   frame_index x1 y1 z1 x2 y2 z2 ... (joint order = topology order)
/// Doubles are written with 17 significant digits, so save followed by load
/// reproduces the sequence bit for bit.
void save_sequence_text(const SkeletonSequence& seq, std::ostream& out);
void save_sequence_text(const SkeletonSequence& seq, const std::string& path);
SkeletonSequence load_sequence_text(std::istream& in, int joint_count, double fps = 30.0);
SkeletonSequence load_sequence_text(const std::string& path, int joint_count, double fps = 30.0);

/// One skeleton-text line (frame_index then 3*joint_count doubles) parsed on
/// its own; the building block of the stdin streaming mode. line_no only
/// labels error messages.
SkeletonFrame parse_frame_line(const std::string& line, int joint_count, std::size_t line_no = 0);

/// Dataset-native skeleton layout: 20 lines per frame, each "x y z conf"
/// (the trailing confidence column is ignored), frames in stream order with
/// an optional "n_frames n_values" header line. joint_map, when non-empty,
/// permutes source joint rows into topology order: row i becomes joint
/// joint_map[i].
SkeletonSequence load_sequence_native(std::istream& in, int joint_count,
                                      const std::vector<int>& joint_map = {}, double fps = 30.0);
SkeletonSequence load_sequence_native(const std::string& path, int joint_count,
                                      const std::vector<int>& joint_map = {}, double fps = 30.0);

/// Annotations CSV: class_id,start_frame,end_frame,action_point with an
/// empty action_point column allowed. '#' lines and a leading header line
/// are skipped on load; nothing but rows is written on save.
void save_annotations_csv(const std::vector<Annotation>& annotations, std::ostream& out);
void save_annotations_csv(const std::vector<Annotation>& annotations, const std::string& path);
std::vector<Annotation> load_annotations_csv(std::istream& in);
std::vector<Annotation> load_annotations_csv(const std::string& path);

/// Hybrid ground truth for latency evaluation: every annotation's action
/// point replaced by its start frame (applied at load time, so evaluators
/// never special-case it).
std::vector<Annotation> start_frames_as_action_points(std::vector<Annotation> annotations);

/// Topology file:
///   joint <name>        (one per line, in index order)
///   reference <name>
///   triplet <a> <vertex> <b>
void save_topology(const SkeletonTopology& topo, std::ostream& out);
void save_topology(const SkeletonTopology& topo, const std::string& path);
SkeletonTopology load_topology(std::istream& in);
SkeletonTopology load_topology(const std::string& path);

/// Codebook file: header "dim k seed subsample_rate" then one centroid per
/// line (dim doubles). Round-trips exactly.
void save_codebook(const Codebook& cb, std::ostream& out);
void save_codebook(const Codebook& cb, const std::string& path);
Codebook load_codebook(std::istream& in);
Codebook load_codebook(const std::string& path);

/// Class model file: header "class_id k threshold bias" then k weights, one
/// per line. Round-trips exactly.
void save_model(const ClassModel& model, std::ostream& out);
void save_model(const ClassModel& model, const std::string& path);
ClassModel load_model(std::istream& in);
ClassModel load_model(const std::string& path);

/// Detection CSV: header line then
///   class_id,start_frame,end_frame,trigger_frame,score
void save_detections_csv(const std::vector<DetectionEvent>& events, std::ostream& out);
void save_detections_csv(const std::vector<DetectionEvent>& events, const std::string& path);
std::vector<DetectionEvent> load_detections_csv(std::istream& in);
std::vector<DetectionEvent> load_detections_csv(const std::string& path);

/// Descriptor dump: one line per frame, "frame_index v1 v2 ... vD".
void save_descriptors(const std::vector<GestureletDescriptor>& descriptors, std::ostream& out);
void save_descriptors(const std::vector<GestureletDescriptor>& descriptors,
                      const std::string& path);

/// Flat "key = value" config file with '#' comments and blank lines.
std::map<std::string, std::string> load_config_file(std::istream& in);
std::map<std::string, std::string> load_config_file(const std::string& path);

/// Shortest decimal form that parses back to exactly the same double.
std::string format_double(double v);

}  // namespace bog
