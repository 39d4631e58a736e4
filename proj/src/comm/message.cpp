#include "v2x/comm/message.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <limits>

#include "v2x/errors.hpp"

namespace v2x {

static_assert(std::endian::native == std::endian::little);

std::string to_string(PayloadKind kind) {
  switch (kind) {
    case PayloadKind::track: return "track";
    case PayloadKind::map: return "map";
    case PayloadKind::occupancy: return "occupancy";
    case PayloadKind::motion: return "motion";
  }
  return "unknown";
}

bool carries_queries(PayloadKind kind) { return kind != PayloadKind::occupancy; }

std::size_t V2XMessage::payload_bytes() const {
  if (carries_queries(kind)) return 4 * (std::size_t{count} * dim + std::size_t{count} * 2);
  return 4 * std::size_t{height} * width;
}

void V2XMessage::validate() const {
  if (carries_queries(kind)) {
    if (features.size() != std::size_t{count} * dim || refs.size() != std::size_t{count} * 2 ||
        scores.size() != count) {
      throw ContractError("message payload length does not match count " + std::to_string(count) +
                          " x dim " + std::to_string(dim));
    }
  } else if (probs.size() != std::size_t{height} * width) {
    throw ContractError("occupancy payload length does not match grid size");
  }
}

namespace {

float quantize(double v) {
  if (!std::isfinite(v) || std::abs(v) > std::numeric_limits<float>::max()) {
    throw NumericError("value not representable as a finite f32: " + std::to_string(v));
  }
  return static_cast<float>(v);
}

PayloadKind payload_kind(QueryKind k) {
  switch (k) {
    case QueryKind::track: return PayloadKind::track;
    case QueryKind::map: return PayloadKind::map;
    case QueryKind::motion: return PayloadKind::motion;
  }
  throw ContractError("unknown query kind");
}

QueryKind query_kind(PayloadKind k) {
  switch (k) {
    case PayloadKind::track: return QueryKind::track;
    case PayloadKind::map: return QueryKind::map;
    case PayloadKind::motion: return QueryKind::motion;
    case PayloadKind::occupancy: break;
  }
  throw ContractError("occupancy message carries no queries");
}

template <class T>
void put(std::vector<std::uint8_t>& out, T v) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  out.insert(out.end(), p, p + sizeof(T));
}

class Cursor {
 public:
  explicit Cursor(std::span<const std::uint8_t> b) : b_(b) {}
  template <class T>
  T get() {
    if (b_.size() - pos_ < sizeof(T)) throw DecodeError("message truncated");
    T v;
    std::memcpy(&v, b_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::vector<float> floats(std::size_t n) {
    if ((b_.size() - pos_) / 4 < n) throw DecodeError("message truncated");
    std::vector<float> v(n);
    std::memcpy(v.data(), b_.data() + pos_, 4 * n);
    pos_ += 4 * n;
    return v;
  }
  bool done() const { return pos_ == b_.size(); }

 private:
  std::span<const std::uint8_t> b_;
  std::size_t pos_ = 0;
};

void require_finite(const std::vector<float>& v) {
  for (float x : v)
    if (!std::isfinite(x)) throw DecodeError("non-finite value in message");
}

}  // namespace

V2XMessage encode(const QuerySet& qs, std::uint32_t sender, std::uint64_t timestamp_ms) {
  qs.validate();
  V2XMessage m;
  m.sender = sender;
  m.timestamp_ms = timestamp_ms;
  m.kind = payload_kind(qs.kind);
  m.count = static_cast<std::uint32_t>(qs.count());
  m.dim = static_cast<std::uint32_t>(qs.dim());
  m.features.reserve(qs.queries.size());
  for (double v : qs.queries.data()) m.features.push_back(quantize(v));
  for (const Point2& p : qs.refs) {
    m.refs.push_back(quantize(p.x));
    m.refs.push_back(quantize(p.y));
  }
  for (double s : qs.scores) m.scores.push_back(quantize(s));
  return m;
}

V2XMessage encode(const OccupancyGrid& grid, std::uint32_t sender, std::uint64_t timestamp_ms) {
  if (grid.probs.size() != grid.rows * grid.cols) throw ContractError("occupancy grid size mismatch");
  V2XMessage m;
  m.sender = sender;
  m.timestamp_ms = timestamp_ms;
  m.kind = PayloadKind::occupancy;
  m.height = static_cast<std::uint32_t>(grid.rows);
  m.width = static_cast<std::uint32_t>(grid.cols);
  m.cell_size = quantize(grid.cell_size);
  m.origin_x = quantize(grid.origin.x);
  m.origin_y = quantize(grid.origin.y);
  for (double p : grid.probs) m.probs.push_back(quantize(p));
  return m;
}

QuerySet decode_queries(const V2XMessage& msg) {
  msg.validate();
  QuerySet qs;
  qs.kind = query_kind(msg.kind);
  qs.agent = msg.sender;
  std::vector<double> data(msg.features.begin(), msg.features.end());
  qs.queries = Matrix(msg.count, msg.dim, std::move(data));
  for (std::size_t i = 0; i < msg.count; ++i) {
    qs.refs.push_back({msg.refs[2 * i], msg.refs[2 * i + 1]});
    qs.scores.push_back(msg.scores[i]);
  }
  return qs;
}

OccupancyGrid decode_grid(const V2XMessage& msg) {
  if (msg.kind != PayloadKind::occupancy) throw ContractError("message carries no occupancy grid");
  msg.validate();
  OccupancyGrid g;
  g.rows = msg.height;
  g.cols = msg.width;
  g.cell_size = msg.cell_size;
  g.origin = {msg.origin_x, msg.origin_y};
  g.probs.assign(msg.probs.begin(), msg.probs.end());
  return g;
}

std::vector<std::uint8_t> to_wire(const V2XMessage& msg) {
  msg.validate();
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderBytes + 20 + msg.payload_bytes() + 4 * msg.scores.size());
  put(out, kWireMagic);
  put(out, kWireVersion);
  put(out, msg.sender);
  put(out, msg.timestamp_ms);
  put(out, static_cast<std::uint8_t>(msg.kind));
  if (carries_queries(msg.kind)) {
    put(out, msg.count);
    put(out, msg.dim);
    for (float v : msg.features) put(out, v);
    for (float v : msg.refs) put(out, v);
    for (float v : msg.scores) put(out, v);
  } else {
    put(out, msg.height);
    put(out, msg.width);
    put(out, msg.cell_size);
    put(out, msg.origin_x);
    put(out, msg.origin_y);
    for (float v : msg.probs) put(out, v);
  }
  return out;
}

V2XMessage from_wire(std::span<const std::uint8_t> bytes) {
  Cursor c(bytes);
  if (c.get<std::uint32_t>() != kWireMagic) throw DecodeError("bad magic");
  if (c.get<std::uint16_t>() != kWireVersion) throw DecodeError("unsupported version");
  V2XMessage m;
  m.sender = c.get<std::uint32_t>();
  m.timestamp_ms = c.get<std::uint64_t>();
  const auto kind = c.get<std::uint8_t>();
  if (kind > 3) throw DecodeError("unknown payload kind " + std::to_string(kind));
  m.kind = static_cast<PayloadKind>(kind);
  if (carries_queries(m.kind)) {
    m.count = c.get<std::uint32_t>();
    m.dim = c.get<std::uint32_t>();
    const std::size_t n = std::size_t{m.count} * m.dim;
    if (m.dim != 0 && n / m.dim != m.count) throw DecodeError("payload size overflow");
    m.features = c.floats(n);
    m.refs = c.floats(std::size_t{m.count} * 2);
    m.scores = c.floats(m.count);
    for (float s : m.scores)
      if (!(s >= 0.0f && s <= 1.0f)) throw DecodeError("score outside [0, 1]");
  } else {
    m.height = c.get<std::uint32_t>();
    m.width = c.get<std::uint32_t>();
    m.cell_size = c.get<float>();
    m.origin_x = c.get<float>();
    m.origin_y = c.get<float>();
    if (!(m.cell_size > 0.0f)) throw DecodeError("non-positive cell size");
    m.probs = c.floats(std::size_t{m.height} * m.width);
  }
  if (!c.done()) throw DecodeError("length mismatch: trailing bytes");
  require_finite(m.features);
  require_finite(m.refs);
  require_finite(m.probs);
  if (!std::isfinite(m.origin_x) || !std::isfinite(m.origin_y)) throw DecodeError("non-finite origin");
  return m;
}

}  // namespace v2x
