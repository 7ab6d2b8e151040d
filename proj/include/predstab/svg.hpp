#pragma once

#include <cstdio>
#include <string>
#include <vector>

namespace predstab {
namespace svg {

// Fixed two-decimal pixel coordinates keep documents byte-stable across runs.
inline std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (const char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

struct Style {
  std::string stroke = "none";
  double stroke_width = 1.0;
  std::string fill = "none";
  double opacity = 1.0;
  std::string css_class;

  std::string attrs() const {
    std::string a;
    if (!css_class.empty()) a += " class=\"" + css_class + "\"";
    a += " stroke=\"" + stroke + "\"";
    if (stroke != "none") a += " stroke-width=\"" + px(stroke_width) + "\"";
    a += " fill=\"" + fill + "\"";
    if (opacity < 1.0) a += " opacity=\"" + px(opacity) + "\"";
    return a;
  }
};

// Standalone SVG document: no external references, one root element,
// explicit viewBox.
class Document {
 public:
  Document(double width, double height) : width_(width), height_(height) {}

  void line(double x1, double y1, double x2, double y2, const Style& st) {
    body_ += "<line x1=\"" + px(x1) + "\" y1=\"" + px(y1) + "\" x2=\"" + px(x2) +
             "\" y2=\"" + px(y2) + "\"" + st.attrs() + "/>\n";
  }

  void polyline(const std::vector<std::pair<double, double>>& pts, const Style& st) {
    if (pts.empty()) return;
    std::string d = "<polyline points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i) d.push_back(' ');
      d += px(pts[i].first) + "," + px(pts[i].second);
    }
    d += "\"" + st.attrs() + "/>\n";
    body_ += d;
  }

  void circle(double cx, double cy, double r, const Style& st) {
    body_ += "<circle cx=\"" + px(cx) + "\" cy=\"" + px(cy) + "\" r=\"" + px(r) +
             "\"" + st.attrs() + "/>\n";
  }

  void rect(double x, double y, double w, double h, const Style& st) {
    body_ += "<rect x=\"" + px(x) + "\" y=\"" + px(y) + "\" width=\"" + px(w) +
             "\" height=\"" + px(h) + "\"" + st.attrs() + "/>\n";
  }

  void text(double x, double y, const std::string& s, double size = 12.0,
            const std::string& anchor = "start", double rotate_deg = 0.0) {
    body_ += "<text x=\"" + px(x) + "\" y=\"" + px(y) + "\" font-size=\"" + px(size) +
             "\" font-family=\"sans-serif\" text-anchor=\"" + anchor + "\"";
    if (rotate_deg != 0.0)
      body_ += " transform=\"rotate(" + px(rotate_deg) + " " + px(x) + " " + px(y) + ")\"";
    body_ += ">" + escape(s) + "</text>\n";
  }

  std::string str() const {
    std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + px(width_) +
           "\" height=\"" + px(height_) + "\" viewBox=\"0 0 " + px(width_) + " " +
           px(height_) + "\">\n";
    out += body_;
    out += "</svg>\n";
    return out;
  }

 private:
  double width_, height_;
  std::string body_;
};

}  // namespace svg
}  // namespace predstab
