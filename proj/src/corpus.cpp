#include "lintseq/corpus.hpp"

#include <cstdio>
#include <set>
#include <sstream>
#include <unordered_set>

#include "json.hpp"
#include "lintseq/text.hpp"

namespace lintseq {

using ordered_json = nlohmann::ordered_json;

std::vector<std::string> SourceExample::lines() const { return split_lines(program); }

SourceExample make_example(std::string id, std::optional<std::string> instruction, std::string_view program) {
  SourceExample ex;
  ex.id = std::move(id);
  if (instruction) ex.instruction = normalize_newlines(*instruction);
  ex.program = normalize_newlines(program);
  ex.trailing_newline = !ex.program.empty() && ex.program.back() == '\n';
  ex.line_count = split_lines(ex.program).size();
  return ex;
}

std::string restore_trailing_newline(std::string canonical, bool trailing_newline) {
  if (!trailing_newline && !canonical.empty() && canonical.back() == '\n') canonical.pop_back();
  return canonical;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw CorpusError("read failed for " + path.string());
  return buf.str();
}

namespace {

std::string padded_index(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06zu", index);
  return buf;
}

template <typename T, typename Parse>
LoadResult<T> parse_lines(std::string_view content, Parse parse) {
  LoadResult<T> result;
  std::size_t line_no = 0;
  std::size_t ordinal = 0;
  std::size_t begin = 0;
  while (begin < content.size()) {
    std::size_t end = content.find('\n', begin);
    if (end == std::string_view::npos) end = content.size();
    std::string_view line = content.substr(begin, end - begin);
    begin = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (is_blank(line)) continue;
    try {
      result.items.push_back(parse(line, ordinal));
    } catch (const std::exception& e) {
      result.issues.push_back(RecordIssue{line_no, e.what()});
    }
    ++ordinal;
  }
  return result;
}

std::optional<std::string> optional_string(const nlohmann::json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw CorpusError(std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

}  // namespace

LoadResult<SourceExample> parse_corpus(std::string_view content) {
  if (!is_valid_utf8(content)) throw CorpusError("corpus is not valid UTF-8");
  std::unordered_set<std::string> ids;
  auto result = parse_lines<SourceExample>(content, [&](std::string_view line, std::size_t ordinal) {
    nlohmann::json obj = nlohmann::json::parse(line);
    if (!obj.is_object()) throw CorpusError("record is not a JSON object");
    auto program = optional_string(obj, "program");
    if (!program) throw CorpusError("record has no 'program' field");
    std::string id;
    if (auto it = obj.find("id"); it != obj.end() && !it->is_null()) {
      if (it->is_string()) {
        id = it->get<std::string>();
      } else if (it->is_number_integer()) {
        id = it->dump();
      } else {
        throw CorpusError("field 'id' must be a string or integer");
      }
    } else {
      id = padded_index(ordinal);
    }
    if (ids.contains(id)) throw CorpusError("duplicate id '" + id + "'");
    ids.insert(id);
    return make_example(std::move(id), optional_string(obj, "instruction"), *program);
  });
  return result;
}

LoadResult<SourceExample> load_corpus(const std::filesystem::path& path, CorpusFormat) {
  if (!std::filesystem::exists(path)) throw CorpusError("corpus file does not exist: " + path.string());
  return parse_corpus(read_file(path));
}

DedupResult deduplicate(std::vector<SourceExample> corpus) {
  DedupResult out;
  std::set<std::pair<std::optional<std::string>, std::string>> seen;
  out.examples.reserve(corpus.size());
  for (auto& ex : corpus) {
    if (seen.emplace(ex.instruction, ex.program).second) {
      out.examples.push_back(std::move(ex));
    } else {
      ++out.removed;
    }
  }
  return out;
}

std::string record_to_json_line(const EditSequenceRecord& r) {
  ordered_json j;
  j["source_id"] = r.source_id;
  j["sample_index"] = r.sample_index;
  j["instruction"] = r.instruction ? ordered_json(*r.instruction) : ordered_json(nullptr);
  j["program"] = r.program;
  j["trailing_newline"] = r.trailing_newline;
  ordered_json edits = ordered_json::array();
  for (const auto& e : r.edits) edits.push_back(e.render());
  j["edits"] = std::move(edits);
  j["training_text"] = r.training_text;
  j["num_edits"] = r.num_edits;
  j["seed_path"] = {{"global_seed", r.seed_path.global_seed},
                    {"example_index", r.seed_path.example_index},
                    {"sample_index", r.seed_path.sample_index}};
  return j.dump();
}

EditSequenceRecord record_from_json_line(std::string_view line) {
  nlohmann::json j = nlohmann::json::parse(line);
  if (!j.is_object()) throw CorpusError("record is not a JSON object");
  EditSequenceRecord r;
  try {
    r.source_id = j.at("source_id").get<std::string>();
    r.sample_index = j.at("sample_index").get<std::uint64_t>();
    r.instruction = optional_string(j, "instruction");
    r.program = j.at("program").get<std::string>();
    r.trailing_newline = j.value("trailing_newline", !r.program.empty() && r.program.back() == '\n');
    for (const auto& e : j.at("edits")) r.edits.push_back(parse_diff(e.get<std::string>()));
    r.training_text = j.at("training_text").get<std::string>();
    r.num_edits = j.at("num_edits").get<std::size_t>();
    const auto& sp = j.at("seed_path");
    r.seed_path = SeedPath{sp.at("global_seed").get<std::uint64_t>(), sp.at("example_index").get<std::uint64_t>(),
                           sp.at("sample_index").get<std::uint64_t>()};
  } catch (const nlohmann::json::exception& e) {
    throw CorpusError(std::string("malformed record: ") + e.what());
  }
  if (r.num_edits != r.edits.size()) throw CorpusError("num_edits disagrees with edits");
  return r;
}

RecordWriter::RecordWriter(const std::filesystem::path& path) : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw CorpusError("cannot open for writing: " + path.string());
}

void RecordWriter::write(const EditSequenceRecord& record) {
  out_ << record_to_json_line(record) << '\n';
  if (!out_) throw CorpusError("write failed: " + path_.string());
  ++count_;
}

void RecordWriter::close() {
  out_.flush();
  if (!out_) throw CorpusError("write failed: " + path_.string());
  out_.close();
}

std::size_t write_records(const std::vector<EditSequenceRecord>& records, const std::filesystem::path& path) {
  RecordWriter writer(path);
  for (const auto& r : records) writer.write(r);
  writer.close();
  return writer.count();
}

LoadResult<EditSequenceRecord> load_records(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw CorpusError("records file does not exist: " + path.string());
  const std::string content = read_file(path);
  if (!is_valid_utf8(content)) throw CorpusError("records file is not valid UTF-8");
  return parse_lines<EditSequenceRecord>(content,
                                         [](std::string_view line, std::size_t) { return record_from_json_line(line); });
}

}  // namespace lintseq
