#include "mmverify/aig.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace mmv {

ParseError::ParseError(Kind kind, std::size_t line, const std::string& what)
    : AigError("line " + std::to_string(line) + ": " + what), kind_(kind), line_(line) {}

namespace {

using Kind = ParseError::Kind;

class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  bool next(std::string_view& line) {
    if (pos_ >= text_.size()) return false;
    std::size_t end = text_.find('\n', pos_);
    if (end == std::string_view::npos) end = text_.size();
    line = text_.substr(pos_, end - pos_);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos_ = end + 1;
    ++line_no_;
    return true;
  }
  std::size_t line_no() const { return line_no_; }
  std::size_t pos() const { return pos_; }
  std::string_view rest() const { return pos_ < text_.size() ? text_.substr(pos_) : std::string_view{}; }
  void skip(std::size_t n) { pos_ += n; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_no_ = 0;
};

std::vector<std::uint64_t> parse_numbers(std::string_view line, std::size_t line_no, Kind kind) {
  std::vector<std::uint64_t> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    if (i == line.size()) break;
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(line.data() + i, line.data() + line.size(), v);
    if (ec != std::errc() || (ptr != line.data() + line.size() && *ptr != ' '))
      throw ParseError(kind, line_no, "expected unsigned integers, got '" + std::string(line) + "'");
    i = static_cast<std::size_t>(ptr - line.data());
    out.push_back(v);
  }
  return out;
}

struct Header {
  bool binary;
  std::uint64_t m, i, l, o, a;
};

Header parse_header(std::string_view line) {
  Header h{};
  if (line.substr(0, 4) == "aag ") {
    h.binary = false;
  } else if (line.substr(0, 4) == "aig ") {
    h.binary = true;
  } else {
    throw ParseError(Kind::MalformedHeader, 1, "expected 'aag' or 'aig' header");
  }
  std::vector<std::uint64_t> nums;
  try {
    nums = parse_numbers(line.substr(4), 1, Kind::MalformedHeader);
  } catch (const ParseError&) {
    throw ParseError(Kind::MalformedHeader, 1, "header fields must be unsigned integers");
  }
  if (nums.size() < 5) throw ParseError(Kind::MalformedHeader, 1, "header needs M I L O A");
  if (nums.size() > 5) {
    for (std::size_t k = 5; k < nums.size(); ++k)
      if (nums[k] != 0) throw ParseError(Kind::Unsupported, 1, "B/C/J/F sections are not supported");
  }
  h.m = nums[0];
  h.i = nums[1];
  h.l = nums[2];
  h.o = nums[3];
  h.a = nums[4];
  if (h.m >= (std::uint64_t{1} << 31)) throw ParseError(Kind::MalformedHeader, 1, "maximum variable index too large");
  if (h.i + h.l + h.a > h.m) throw ParseError(Kind::MalformedHeader, 1, "M must be at least I + L + A");
  if (h.l > 0) throw ParseError(Kind::Unsupported, 1, "latches are not supported");
  return h;
}

void parse_symbols(LineReader& reader, std::vector<std::string>& input_names,
                   std::vector<std::string>& output_names) {
  std::string_view line;
  while (reader.next(line)) {
    if (line.empty()) continue;
    if (line[0] == 'c') break;
    char kind = line[0];
    std::size_t space = line.find(' ');
    if ((kind != 'i' && kind != 'o' && kind != 'l' && kind != 'b' && kind != 'c') || space == std::string_view::npos)
      throw ParseError(Kind::Malformed, reader.line_no(), "malformed symbol line");
    std::uint64_t pos = 0;
    auto [ptr, ec] = std::from_chars(line.data() + 1, line.data() + space, pos);
    if (ec != std::errc() || ptr != line.data() + space)
      throw ParseError(Kind::Malformed, reader.line_no(), "malformed symbol position");
    std::string name(line.substr(space + 1));
    if (kind == 'i') {
      if (pos >= input_names.size()) throw ParseError(Kind::LiteralOutOfRange, reader.line_no(), "input symbol index out of range");
      input_names[pos] = std::move(name);
    } else if (kind == 'o') {
      if (pos >= output_names.size()) throw ParseError(Kind::LiteralOutOfRange, reader.line_no(), "output symbol index out of range");
      output_names[pos] = std::move(name);
    }
  }
}

std::uint64_t decode_delta(std::string_view data, std::size_t& pos, std::size_t line_no) {
  std::uint64_t x = 0;
  unsigned shift = 0;
  while (true) {
    if (pos >= data.size()) throw ParseError(Kind::Truncated, line_no, "truncated binary AND section");
    auto byte = static_cast<unsigned char>(data[pos++]);
    x |= std::uint64_t{byte & 0x7fu} << shift;
    if (!(byte & 0x80u)) return x;
    shift += 7;
    if (shift > 63) throw ParseError(Kind::Malformed, line_no, "oversized delta encoding");
  }
}

}  // namespace

Aig parse_aiger(std::string_view text) {
  LineReader reader(text);
  std::string_view line;
  if (!reader.next(line)) throw ParseError(Kind::Truncated, 1, "empty file");
  Header h = parse_header(line);
  const std::uint64_t max_lit = 2 * h.m + 1;

  std::vector<NodeId> inputs;
  std::vector<Literal> outputs;
  std::vector<Gate> gates;
  std::vector<std::size_t> gate_lines;
  std::vector<std::size_t> output_lines;

  auto need_line = [&](const char* what) {
    if (!reader.next(line)) throw ParseError(Kind::Truncated, reader.line_no() + 1, std::string("missing ") + what);
  };

  if (h.binary) {
    for (std::uint64_t k = 0; k < h.i; ++k) inputs.push_back(static_cast<NodeId>(k + 1));
  } else {
    for (std::uint64_t k = 0; k < h.i; ++k) {
      need_line("input line");
      auto nums = parse_numbers(line, reader.line_no(), Kind::Malformed);
      if (nums.size() != 1) throw ParseError(Kind::Malformed, reader.line_no(), "input line needs one literal");
      if (nums[0] > max_lit) throw ParseError(Kind::LiteralOutOfRange, reader.line_no(), "input literal exceeds maximum");
      if (nums[0] < 2 || (nums[0] & 1))
        throw ParseError(Kind::Malformed, reader.line_no(), "input literal must be even and non-constant");
      inputs.push_back(static_cast<NodeId>(nums[0] >> 1));
    }
  }
  for (std::uint64_t k = 0; k < h.o; ++k) {
    need_line("output line");
    auto nums = parse_numbers(line, reader.line_no(), Kind::Malformed);
    if (nums.size() != 1) throw ParseError(Kind::Malformed, reader.line_no(), "output line needs one literal");
    if (nums[0] > max_lit) throw ParseError(Kind::LiteralOutOfRange, reader.line_no(), "output literal exceeds maximum");
    outputs.push_back(Literal::from_aiger(static_cast<std::uint32_t>(nums[0])));
    output_lines.push_back(reader.line_no());
  }
  if (h.binary) {
    std::string_view data = reader.rest();
    std::size_t pos = 0;
    for (std::uint64_t k = 0; k < h.a; ++k) {
      std::uint64_t lhs = 2 * (h.i + k + 1);
      std::uint64_t d0 = decode_delta(data, pos, reader.line_no() + 1);
      std::uint64_t d1 = decode_delta(data, pos, reader.line_no() + 1);
      if (d0 > lhs || d1 > lhs - d0) throw ParseError(Kind::LiteralOutOfRange, reader.line_no() + 1, "invalid delta in AND section");
      std::uint64_t rhs0 = lhs - d0;
      std::uint64_t rhs1 = rhs0 - d1;
      gates.push_back({static_cast<NodeId>(lhs >> 1), Literal::from_aiger(static_cast<std::uint32_t>(rhs0)),
                       Literal::from_aiger(static_cast<std::uint32_t>(rhs1))});
      gate_lines.push_back(reader.line_no() + 1);
    }
    reader.skip(pos);
  } else {
    for (std::uint64_t k = 0; k < h.a; ++k) {
      need_line("AND line");
      auto nums = parse_numbers(line, reader.line_no(), Kind::Malformed);
      if (nums.size() != 3) throw ParseError(Kind::Malformed, reader.line_no(), "AND line needs three literals");
      for (std::uint64_t v : nums)
        if (v > max_lit) throw ParseError(Kind::LiteralOutOfRange, reader.line_no(), "AND literal " + std::to_string(v) + " exceeds maximum");
      if (nums[0] < 2 || (nums[0] & 1)) throw ParseError(Kind::Malformed, reader.line_no(), "AND output must be even and non-constant");
      gates.push_back({static_cast<NodeId>(nums[0] >> 1), Literal::from_aiger(static_cast<std::uint32_t>(nums[1])),
                       Literal::from_aiger(static_cast<std::uint32_t>(nums[2]))});
      gate_lines.push_back(reader.line_no());
    }
  }

  // Definitions and references, checked with line numbers before building.
  std::vector<std::int64_t> defined_at(h.m + 1, -1);
  defined_at[0] = 0;
  for (NodeId id : inputs) {
    if (defined_at[id] >= 0) throw ParseError(Kind::Malformed, 1, "variable " + std::to_string(id) + " defined twice");
    defined_at[id] = 0;
  }
  for (std::size_t k = 0; k < gates.size(); ++k) {
    NodeId id = gates[k].id;
    if (defined_at[id] >= 0) throw ParseError(Kind::Malformed, gate_lines[k], "variable " + std::to_string(id) + " defined twice");
    defined_at[id] = static_cast<std::int64_t>(k) + 1;
  }
  for (std::size_t k = 0; k < gates.size(); ++k) {
    for (Literal l : {gates[k].left, gates[k].right})
      if (defined_at[l.node] < 0)
        throw ParseError(Kind::UndefinedLiteral, gate_lines[k], "literal " + std::to_string(l.aiger()) + " is not defined");
  }
  for (std::size_t k = 0; k < outputs.size(); ++k)
    if (defined_at[outputs[k].node] < 0)
      throw ParseError(Kind::UndefinedLiteral, output_lines[k], "output literal " + std::to_string(outputs[k].aiger()) + " is not defined");

  // Cycle check by iterative DFS over gate children.
  {
    std::vector<std::uint8_t> state(h.m + 1, 0);  // 0 new, 1 on stack, 2 done
    for (std::size_t start = 0; start < gates.size(); ++start) {
      if (state[gates[start].id]) continue;
      std::vector<std::pair<std::size_t, int>> stack{{start, 0}};
      state[gates[start].id] = 1;
      while (!stack.empty()) {
        auto& [k, child] = stack.back();
        if (child == 2) {
          state[gates[k].id] = 2;
          stack.pop_back();
          continue;
        }
        Literal l = child == 0 ? gates[k].left : gates[k].right;
        ++child;
        std::int64_t def = defined_at[l.node];
        if (def <= 0) continue;
        std::size_t c = static_cast<std::size_t>(def - 1);
        if (state[l.node] == 1) throw ParseError(Kind::Cycle, gate_lines[c], "cyclic definition through variable " + std::to_string(l.node));
        if (state[l.node] == 0) {
          state[l.node] = 1;
          stack.emplace_back(c, 0);
        }
      }
    }
  }

  std::vector<std::string> input_names(inputs.size()), output_names(outputs.size());
  parse_symbols(reader, input_names, output_names);
  return Aig::from_parts(static_cast<NodeId>(h.m), std::move(inputs), std::move(gates), std::move(outputs),
                         std::move(input_names), std::move(output_names));
}

Aig read_aiger_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw AigError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_aiger(buf.str());
}

std::string write_aag(const Aig& aig) {
  std::ostringstream out;
  out << "aag " << aig.max_var() << ' ' << aig.num_inputs() << " 0 " << aig.num_outputs() << ' ' << aig.num_gates() << '\n';
  for (NodeId id : aig.inputs()) out << 2 * id << '\n';
  for (Literal l : aig.outputs()) out << l.aiger() << '\n';
  for (const Gate& g : aig.gates()) out << 2 * g.id << ' ' << g.left.aiger() << ' ' << g.right.aiger() << '\n';
  for (std::size_t i = 0; i < aig.num_inputs(); ++i)
    if (!aig.input_name(i).empty()) out << 'i' << i << ' ' << aig.input_name(i) << '\n';
  for (std::size_t i = 0; i < aig.num_outputs(); ++i)
    if (!aig.output_name(i).empty()) out << 'o' << i << ' ' << aig.output_name(i) << '\n';
  return out.str();
}

}  // namespace mmv
