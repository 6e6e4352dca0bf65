#pragma once

#include "cutvem/geometry.hpp"

#include <sstream>
#include <string>
#include <vector>

namespace cutvem {

/// Minimal SVG emitter. World coordinates are mapped into a fixed-size
/// canvas with y pointing up.
class SvgCanvas {
public:
    SvgCanvas(Rect world, double width_px = 640.0, double margin_px = 20.0);

    void polygon(const std::vector<Point2>& pts, const std::string& fill, const std::string& stroke = "black",
                 double stroke_width = 0.5);
    void polyline(const std::vector<Point2>& pts, const std::string& stroke, double stroke_width = 1.0);
    void circle(Point2 c, double radius_px, const std::string& fill);
    void text(Point2 at, const std::string& label, double size_px = 12.0);

    std::string str() const;
    void save(const std::string& path) const;

private:
    Point2 map(Point2 p) const;

    Rect world_;
    double width_px_;
    double height_px_;
    double margin_px_;
    double scale_;
    std::ostringstream body_;
};

/// Qualitative palette indexed by a small non-negative integer.
std::string palette_color(int index);

/// Linear blue-to-red ramp for t in [0, 1].
std::string ramp_color(double t);

/// Log-scale scatter or line plot with labelled axes.
struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    bool lines = true;
};

void write_plot_svg(const std::string& path, const std::vector<PlotSeries>& series, const std::string& x_label,
                    const std::string& y_label, bool log_x, bool log_y);

} // namespace cutvem
