#include "aurk/roi_layout.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "aurk/csv.hpp"
#include "aurk/error.hpp"
#include "builtin_data.hpp"

namespace aurk {

std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

const Point& DerivedPoints::at(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return points[i];
  throw std::out_of_range("unknown derived point '" + std::string(name) + "'");
}

namespace {

std::vector<std::string> tokens(std::string_view line) {
  std::istringstream ss{std::string(line)};
  std::vector<std::string> out;
  for (std::string t; ss >> t;) out.push_back(t);
  return out;
}

int find_derived(const std::vector<RoiLayout::DerivedSpec>& specs, std::string_view name) {
  for (std::size_t i = 0; i < specs.size(); ++i)
    if (specs[i].name == name) return static_cast<int>(i);
  return -1;
}

RoiLayout::PointRef parse_point_ref(const std::vector<RoiLayout::DerivedSpec>& specs,
                                    std::string_view tok) {
  if (tok.size() > 1 && tok[0] == 'L' && std::isdigit(static_cast<unsigned char>(tok[1]))) {
    const int k = csv::parse_int(tok.substr(1), "landmark index");
    if (k < 0 || k >= kLandmarkCount)
      throw FormatError("landmark index out of range: " + std::string(tok));
    return {false, k};
  }
  const int d = find_derived(specs, tok);
  if (d < 0) throw FormatError("unknown point reference '" + std::string(tok) + "'");
  return {true, d};
}

RoiLayout::VertexRef parse_vertex(const std::vector<RoiLayout::DerivedSpec>& specs,
                                  std::string_view tok) {
  using Kind = RoiLayout::VertexRef::Kind;
  if (tok == "TL") return {Kind::top_left, {}};
  if (tok == "TR") return {Kind::top_right, {}};
  if (tok == "BL") return {Kind::bottom_left, {}};
  if (tok == "BR") return {Kind::bottom_right, {}};
  const std::size_t open = tok.find('(');
  if (open != std::string_view::npos) {
    if (tok.back() != ')') throw FormatError("bad vertex '" + std::string(tok) + "'");
    const std::string_view fn = tok.substr(0, open);
    const std::string_view inner = tok.substr(open + 1, tok.size() - open - 2);
    Kind kind;
    if (fn == "left") kind = Kind::left;
    else if (fn == "right") kind = Kind::right;
    else if (fn == "top") kind = Kind::top;
    else if (fn == "bottom") kind = Kind::bottom;
    else throw FormatError("unknown border projection '" + std::string(fn) + "'");
    return {kind, parse_point_ref(specs, inner)};
  }
  return {Kind::point, parse_point_ref(specs, tok)};
}

}  // namespace

RoiLayout RoiLayout::parse(std::string_view text) {
  RoiLayout layout;
  layout.hash_ = fnv1a64(text);
  const auto lines = csv::content_lines(text);
  if (lines.empty()) throw FormatError("empty roi layout");
  {
    const auto head = tokens(lines.front());
    if (head.size() != 2 || head[0] != "roi_layout")
      throw FormatError("roi layout must start with 'roi_layout <version>'");
    layout.version_ = csv::parse_int(head[1], "layout version");
    if (layout.version_ != 1)
      throw VersionError("unsupported roi layout version " + head[1]);
  }
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto tok = tokens(lines[li]);
    if (tok.front() == "point") {
      if (tok.size() < 4 || tok[2] != "=") throw FormatError("bad point line: " + std::string(lines[li]));
      if (find_derived(layout.derived_, tok[1]) >= 0)
        throw FormatError("duplicate point '" + tok[1] + "'");
      DerivedSpec spec{tok[1], {}};
      double sign = 1.0;
      bool expect_term = true;
      for (std::size_t i = 3; i < tok.size(); ++i) {
        if (tok[i] == "+" || tok[i] == "-") {
          sign = tok[i] == "+" ? 1.0 : -1.0;
          expect_term = true;
          continue;
        }
        if (!expect_term) throw FormatError("missing operator in point '" + spec.name + "'");
        const std::size_t star = tok[i].find('*');
        double coef = 1.0;
        std::string_view ref = tok[i];
        if (star != std::string::npos) {
          coef = csv::parse_double(std::string_view(tok[i]).substr(0, star), "weight");
          ref = std::string_view(tok[i]).substr(star + 1);
        }
        spec.terms.emplace_back(sign * coef, parse_point_ref(layout.derived_, ref));
        sign = 1.0;
        expect_term = false;
      }
      double sum = 0.0;
      for (const auto& [w, r] : spec.terms) sum += w;
      if (spec.terms.empty() || std::abs(sum - 1.0) > 1e-12)
        throw FormatError("weights of point '" + spec.name + "' must sum to 1");
      layout.derived_.push_back(std::move(spec));
    } else if (tok.front() == "roi") {
      if (tok.size() < 7 || tok[3] != ":") throw FormatError("bad roi line: " + std::string(lines[li]));
      RoiSpec roi;
      roi.roi_no = csv::parse_int(tok[1], "roi number");
      roi.name = tok[2];
      for (std::size_t i = 4; i < tok.size(); ++i)
        roi.vertices.push_back(parse_vertex(layout.derived_, tok[i]));
      layout.rois_.push_back(std::move(roi));
    } else {
      throw FormatError("unknown layout directive '" + tok.front() + "'");
    }
  }
  std::sort(layout.rois_.begin(), layout.rois_.end(),
            [](const RoiSpec& a, const RoiSpec& b) { return a.roi_no < b.roi_no; });
  if (layout.rois_.size() != static_cast<std::size_t>(kBasicRoiCount))
    throw FormatError("roi layout must define exactly 43 regions");
  for (int i = 0; i < kBasicRoiCount; ++i)
    if (layout.rois_[static_cast<std::size_t>(i)].roi_no != i + 1)
      throw FormatError("roi numbers must be 1..43, each exactly once");
  if (find_derived(layout.derived_, "face_center") < 0)
    throw FormatError("roi layout must define point 'face_center'");
  return layout;
}

RoiLayout RoiLayout::load(const std::string& path) { return parse(csv::read_text_file(path)); }

const RoiLayout& RoiLayout::builtin() {
  static const RoiLayout layout = parse(detail::builtin_roi_layout());
  return layout;
}

DerivedPoints RoiLayout::derive(const Landmarks68& lm) const {
  DerivedPoints dp;
  dp.names.reserve(derived_.size());
  dp.points.reserve(derived_.size());
  for (const DerivedSpec& spec : derived_) {
    Point p;
    for (const auto& [w, ref] : spec.terms) {
      const Point& q = ref.derived ? dp.points[static_cast<std::size_t>(ref.index)] : lm[ref.index];
      p.x += w * q.x;
      p.y += w * q.y;
    }
    dp.names.push_back(spec.name);
    dp.points.push_back(p);
  }
  return dp;
}

std::vector<BasicRoi> RoiLayout::partition(const Landmarks68& lm, const DerivedPoints& dp) const {
  const double w = lm.image_width;
  const double h = lm.image_height;
  auto resolve = [&](const PointRef& r) -> Point {
    const Point& p = r.derived ? dp.points.at(static_cast<std::size_t>(r.index)) : lm[r.index];
    return {std::clamp(p.x, 0.0, w), std::clamp(p.y, 0.0, h)};
  };
  std::vector<BasicRoi> out;
  out.reserve(rois_.size());
  for (const RoiSpec& spec : rois_) {
    BasicRoi roi{spec.roi_no, spec.name, {}};
    roi.polygon.reserve(spec.vertices.size());
    for (const VertexRef& v : spec.vertices) {
      switch (v.kind) {
        case VertexRef::Kind::point: roi.polygon.push_back(resolve(v.ref)); break;
        case VertexRef::Kind::left: roi.polygon.push_back({0.0, resolve(v.ref).y}); break;
        case VertexRef::Kind::right: roi.polygon.push_back({w, resolve(v.ref).y}); break;
        case VertexRef::Kind::top: roi.polygon.push_back({resolve(v.ref).x, 0.0}); break;
        case VertexRef::Kind::bottom: roi.polygon.push_back({resolve(v.ref).x, h}); break;
        case VertexRef::Kind::top_left: roi.polygon.push_back({0.0, 0.0}); break;
        case VertexRef::Kind::top_right: roi.polygon.push_back({w, 0.0}); break;
        case VertexRef::Kind::bottom_left: roi.polygon.push_back({0.0, h}); break;
        case VertexRef::Kind::bottom_right: roi.polygon.push_back({w, h}); break;
      }
    }
    if (std::abs(signed_area(roi.polygon)) <= 1e-9)
      throw DegenerateRegionError(spec.roi_no, "basic RoI " + std::to_string(spec.roi_no) + " (" +
                                                   spec.name + ") has zero area");
    out.push_back(std::move(roi));
  }
  return out;
}

DerivedPoints derive_points(const Landmarks68& lm, const RoiLayout& layout) {
  return layout.derive(lm);
}

std::vector<BasicRoi> partition_basic_rois(const Landmarks68& lm, const DerivedPoints& dp,
                                           const RoiLayout& layout) {
  return layout.partition(lm, dp);
}

Bitmap rasterize(const BasicRoi& roi, int width, int height) {
  return rasterize(std::span<const Point>(roi.polygon), width, height);
}

RegionMap::RegionMap(std::span<const BasicRoi> rois, int width, int height)
    : width_(width), height_(height),
      owner_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0) {
  std::vector<const BasicRoi*> order;
  for (const BasicRoi& r : rois) order.push_back(&r);
  std::sort(order.begin(), order.end(),
            [](const BasicRoi* a, const BasicRoi* b) { return a->roi_no < b->roi_no; });
  for (const BasicRoi* r : order) {
    const Bitmap bits = rasterize(*r, width, height);
    const auto raw = bits.raw();
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (!raw[i]) continue;
      if (owner_[i] == 0)
        owner_[i] = static_cast<std::uint8_t>(r->roi_no);
      else
        ++contested_;
    }
  }
}

Bitmap RegionMap::mask(int roi_no) const {
  Bitmap out(width_, height_);
  for (int row = 0; row < height_; ++row)
    for (int col = 0; col < width_; ++col)
      if (owner(col, row) == roi_no) out.set(col, row);
  return out;
}

std::size_t RegionMap::pixel_count(int roi_no) const {
  return static_cast<std::size_t>(
      std::count(owner_.begin(), owner_.end(), static_cast<std::uint8_t>(roi_no)));
}

std::size_t RegionMap::unowned_count() const { return pixel_count(0); }

}  // namespace aurk
