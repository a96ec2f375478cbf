#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace finelogic::probe {

enum class Task { CSS, RFI, NSD };

std::string_view task_name(Task t);
std::optional<Task> task_from_name(std::string_view s);
/// Label strings allowed for each task.
std::vector<std::string> task_labels(Task t);
/// The label treated as the positive class by the probe.
std::string_view positive_label(Task t);

struct DumpHeader {
  int format_version = 1;
  std::string model_id;
  std::string layer = "last";
  std::size_t dim = 0;
  std::string dtype = "f32";
  /// File name of the binary sidecar, relative to the dump; vectors then live there.
  std::optional<std::string> sidecar;
};

struct RepresentationRecord {
  std::string problem_id;
  Task task = Task::CSS;
  int step_index = 0;
  std::optional<std::string> candidate_id;
  std::string label;
  std::vector<float> vector;
};

/// One probing instance handed to the extractor.
struct InstanceSpec {
  std::string problem_id;
  Task task = Task::CSS;
  int step_index = 0;
  std::optional<std::string> candidate_id;
  std::string label;
  std::string prefix_text;
};

class DumpError : public std::runtime_error {
 public:
  DumpError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

nlohmann::json header_to_json(const DumpHeader& h);
DumpHeader header_from_json(const nlohmann::json& j);

/// Writes the header line and one JSON line per record. With `binary`, the
/// vectors go to `<path>.bin` as little-endian f32 and records carry an offset.
void write_dump(const std::filesystem::path& path, DumpHeader header, const std::vector<RepresentationRecord>& records,
                bool binary = false);

/// Single-pass reader; throws DumpError on schema violations.
class DumpReader {
 public:
  explicit DumpReader(const std::filesystem::path& path);
  const DumpHeader& header() const { return header_; }
  std::optional<RepresentationRecord> next();
  std::size_t line() const { return line_; }

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  std::ifstream sidecar_;
  DumpHeader header_;
  std::size_t line_ = 0;
};

struct Dump {
  DumpHeader header;
  std::vector<RepresentationRecord> records;
};

Dump read_dump(const std::filesystem::path& path);

struct DumpReport {
  bool valid = true;
  std::vector<std::string> violations;
  std::size_t records = 0;
  std::size_t dim = 0;
  std::map<std::string, std::size_t> per_task;
};

/// Checks the header, every record, vector widths and per-task instance counts
/// (CSS steps 1..n contiguous, RFI 3+3, NSD 6 anchors of 3+3). Never throws on
/// malformed content.
DumpReport validate_dump(const std::filesystem::path& path);

nlohmann::json instance_to_json(const InstanceSpec& s);
InstanceSpec instance_from_json(const nlohmann::json& j);
void write_instances(const std::filesystem::path& path, const std::vector<InstanceSpec>& specs);
std::vector<InstanceSpec> read_instances(const std::filesystem::path& path);

}  // namespace finelogic::probe
