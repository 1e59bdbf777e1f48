#pragma once

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

#include "aeromon/detector.hpp"

namespace aeromon {

// Feature dump, one row per frame. Header: frame,dist,ewma,label
inline std::string feature_csv(const std::vector<Detection>& detections) {
    std::ostringstream out;
    out << "frame,dist,ewma,label\n";
    for (const Detection& d : detections)
        out << d.frame_index << ',' << d.dist << ',' << d.ewma << ',' << d.state << '\n';
    return out.str();
}

// Scatter of the 2-D feature dataset, class 0 in blue, class 1 in red.
inline std::string scatter_svg(const std::vector<Detection>& detections, int width = 640,
                               int height = 480) {
    double max_x = 1e-9, max_y = 1e-9;
    for (const Detection& d : detections) {
        max_x = std::max(max_x, d.dist);
        max_y = std::max(max_y, d.ewma);
    }
    const int mleft = 50, mbottom = 40, mtop = 16, mright = 16;
    const double sx = (width - mleft - mright) / max_x;
    const double sy = (height - mtop - mbottom) / max_y;
    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n"
        << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
        << "\" fill=\"white\"/>\n"
        << "<line x1=\"" << mleft << "\" y1=\"" << height - mbottom << "\" x2=\"" << width - mright
        << "\" y2=\"" << height - mbottom << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << mleft << "\" y1=\"" << mtop << "\" x2=\"" << mleft << "\" y2=\""
        << height - mbottom << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << width / 2 << "\" y=\"" << height - 10
        << "\" font-size=\"12\" text-anchor=\"middle\">dist (px)</text>\n"
        << "<text x=\"14\" y=\"" << height / 2
        << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 " << height / 2
        << ")\">ewma (px)</text>\n";
    for (const Detection& d : detections) {
        const double px = mleft + d.dist * sx;
        const double py = height - mbottom - d.ewma * sy;
        out << "<circle cx=\"" << px << "\" cy=\"" << py << "\" r=\"2.5\" fill=\""
            << (d.state == 1 ? "#d62728" : "#1f77b4") << "\" fill-opacity=\"0.6\"/>\n";
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace aeromon
