#include "cutvem/svg.hpp"

#include "cutvem/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace cutvem {

SvgCanvas::SvgCanvas(Rect world, double width_px, double margin_px)
    : world_(world), width_px_(width_px), margin_px_(margin_px)
{
    const double w = std::max(world.width(), 1e-300);
    const double h = std::max(world.height(), 1e-300);
    scale_ = (width_px - 2.0 * margin_px) / w;
    height_px_ = h * scale_ + 2.0 * margin_px;
    body_.precision(6);
}

Point2 SvgCanvas::map(Point2 p) const
{
    return {margin_px_ + (p.x - world_.x0) * scale_, height_px_ - margin_px_ - (p.y - world_.y0) * scale_};
}

void SvgCanvas::polygon(const std::vector<Point2>& pts, const std::string& fill, const std::string& stroke,
                        double stroke_width)
{
    body_ << "<polygon points=\"";
    for (const Point2& p : pts) {
        const Point2 q = map(p);
        body_ << q.x << ',' << q.y << ' ';
    }
    body_ << "\" fill=\"" << fill << "\" stroke=\"" << stroke << "\" stroke-width=\"" << stroke_width << "\"/>\n";
}

void SvgCanvas::polyline(const std::vector<Point2>& pts, const std::string& stroke, double stroke_width)
{
    body_ << "<polyline points=\"";
    for (const Point2& p : pts) {
        const Point2 q = map(p);
        body_ << q.x << ',' << q.y << ' ';
    }
    body_ << "\" fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"" << stroke_width << "\"/>\n";
}

void SvgCanvas::circle(Point2 c, double radius_px, const std::string& fill)
{
    const Point2 q = map(c);
    body_ << "<circle cx=\"" << q.x << "\" cy=\"" << q.y << "\" r=\"" << radius_px << "\" fill=\"" << fill
          << "\"/>\n";
}

void SvgCanvas::text(Point2 at, const std::string& label, double size_px)
{
    const Point2 q = map(at);
    body_ << "<text x=\"" << q.x << "\" y=\"" << q.y << "\" font-size=\"" << size_px
          << "\" font-family=\"sans-serif\">" << label << "</text>\n";
}

std::string SvgCanvas::str() const
{
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_px_ << "\" height=\"" << height_px_
        << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << body_.str() << "</svg>\n";
    return out.str();
}

void SvgCanvas::save(const std::string& path) const
{
    std::ofstream out(path);
    if (!out)
        throw Error("cannot write " + path);
    out << str();
}

std::string palette_color(int index)
{
    static const char* colors[] = {"#8dd3c7", "#fdb462", "#bebada", "#fb8072", "#80b1d3", "#b3de69", "#fccde5",
                                   "#d9d9d9"};
    const int n = static_cast<int>(std::size(colors));
    return colors[((index % n) + n) % n];
}

std::string ramp_color(double t)
{
    t = std::clamp(std::isfinite(t) ? t : 0.0, 0.0, 1.0);
    const int r = static_cast<int>(std::lround(255.0 * t));
    const int b = static_cast<int>(std::lround(255.0 * (1.0 - t)));
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x40%02x", r, b);
    return buf;
}

void write_plot_svg(const std::string& path, const std::vector<PlotSeries>& series, const std::string& x_label,
                    const std::string& y_label, bool log_x, bool log_y)
{
    auto tx = [&](double v) { return log_x ? std::log10(v) : v; };
    auto ty = [&](double v) { return log_y ? std::log10(v) : v; };
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const PlotSeries& s : series)
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            const double px = tx(s.x[i]), py = ty(s.y[i]);
            if (!std::isfinite(px) || !std::isfinite(py))
                continue;
            x0 = std::min(x0, px);
            x1 = std::max(x1, px);
            y0 = std::min(y0, py);
            y1 = std::max(y1, py);
        }
    if (!(x1 > x0)) {
        x0 -= 1.0;
        x1 += 1.0;
    }
    if (!(y1 > y0)) {
        y0 -= 1.0;
        y1 += 1.0;
    }
    // Plot inside a unit-aspect box, stretched to [0,1.6]x[0,1].
    const Rect frame{-0.25, -0.2, 1.75, 1.1};
    SvgCanvas canvas(frame, 800.0, 10.0);
    auto map = [&](double px, double py) {
        return Point2{1.6 * (px - x0) / (x1 - x0), (py - y0) / (y1 - y0)};
    };
    canvas.polyline({{0, 0}, {1.6, 0}, {1.6, 1}, {0, 1}, {0, 0}}, "black", 1.0);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", log_x ? std::pow(10.0, x0) : x0);
    canvas.text({0.0, -0.07}, buf);
    std::snprintf(buf, sizeof buf, "%.3g", log_x ? std::pow(10.0, x1) : x1);
    canvas.text({1.5, -0.07}, buf);
    std::snprintf(buf, sizeof buf, "%.3g", log_y ? std::pow(10.0, y0) : y0);
    canvas.text({-0.22, 0.0}, buf);
    std::snprintf(buf, sizeof buf, "%.3g", log_y ? std::pow(10.0, y1) : y1);
    canvas.text({-0.22, 0.98}, buf);
    canvas.text({0.7, -0.15}, x_label, 14.0);
    canvas.text({-0.22, 1.05}, y_label, 14.0);
    for (std::size_t k = 0; k < series.size(); ++k) {
        const PlotSeries& s = series[k];
        const std::string color = palette_color(static_cast<int>(k) + 3);
        std::vector<Point2> pts;
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            const double px = tx(s.x[i]), py = ty(s.y[i]);
            if (std::isfinite(px) && std::isfinite(py))
                pts.push_back(map(px, py));
        }
        if (s.lines && pts.size() > 1)
            canvas.polyline(pts, color, 1.5);
        for (const Point2& p : pts)
            canvas.circle(p, 2.5, color);
        canvas.text({1.65, 1.0 - 0.06 * static_cast<double>(k)}, s.label);
        canvas.circle({1.63, 1.01 - 0.06 * static_cast<double>(k)}, 3.0, color);
    }
    canvas.save(path);
}

} // namespace cutvem
