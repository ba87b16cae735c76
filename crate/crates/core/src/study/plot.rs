use std::fmt::Write as _;

use super::ConvergenceReport;

const SLOPES: [i32; 2] = [4, 5];
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

fn series(report: &ConvergenceReport) -> Vec<(String, Vec<(f64, f64)>)> {
    report
        .orders
        .iter()
        .map(|o| {
            let pts = report.rows_for(&o.method).filter(|r| r.error > 0.0).map(|r| (r.steps as f64, r.error)).collect();
            (o.method.clone(), pts)
        })
        .collect()
}

/// Reference line `C N^{-p}` passing twice above the largest error at the smallest `N`.
fn slope_anchor(report: &ConvergenceReport) -> Option<(f64, f64)> {
    let n0 = *report.config.steps.first()? as f64;
    let e0 = report.rows.iter().filter(|r| r.steps as f64 == n0).map(|r| r.error).fold(0.0, f64::max);
    (e0 > 0.0).then_some((n0, 2.0 * e0))
}

/// Gnuplot script with the data embedded as datablocks.
pub fn gnuplot_script(report: &ConvergenceReport) -> String {
    let c = &report.config;
    let mut s = String::new();
    let _ = writeln!(s, "# {} (size {}), T = {}", c.problem, c.size, c.t_final);
    s.push_str("set terminal pngcairo size 800,600\nset output 'convergence.png'\n");
    s.push_str("set logscale xy\nset xlabel 'N (time steps)'\nset ylabel 'max-norm error'\nset key bottom left\nset grid\n");
    let data = series(report);
    for (i, (name, pts)) in data.iter().enumerate() {
        let _ = writeln!(s, "# {name}\n$d{i} << EOD");
        for (n, e) in pts {
            let _ = writeln!(s, "{n} {e:e}");
        }
        s.push_str("EOD\n");
    }
    let mut plots: Vec<String> =
        data.iter().enumerate().map(|(i, (name, _))| format!("$d{i} using 1:2 with linespoints title '{name}'")).collect();
    if let Some((n0, e0)) = slope_anchor(report) {
        for p in SLOPES {
            let _ = writeln!(s, "s{p}(x) = {e0:e} * ({n0} / x)**{p}");
            plots.push(format!("s{p}(x) with lines dashtype 2 title 'slope {p}'"));
        }
    }
    let _ = writeln!(s, "plot {}", plots.join(", \\\n     "));
    s
}

struct Axes {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

const W: f64 = 720.0;
const H: f64 = 520.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;

impl Axes {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x.log10() - self.x0) / (self.x1 - self.x0) * (W - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        TOP + (self.y1 - y.log10()) / (self.y1 - self.y0) * (H - TOP - BOTTOM)
    }
}

/// Standalone log-log SVG of error against `N` with slope guides.
pub fn svg_plot(report: &ConvergenceReport) -> String {
    let data = series(report);
    let all: Vec<(f64, f64)> = data.iter().flat_map(|(_, p)| p.iter().copied()).collect();
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    );
    s.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    if all.is_empty() {
        s.push_str("<text x=\"20\" y=\"40\">no data</text>\n</svg>\n");
        return s;
    }
    let lx = |f: fn(f64, f64) -> f64, init: f64, sel: fn(&(f64, f64)) -> f64| all.iter().map(sel).fold(init, f);
    let ax = Axes {
        x0: lx(f64::min, f64::INFINITY, |p| p.0).log10().floor(),
        x1: lx(f64::max, 0.0, |p| p.0).log10().ceil().max(lx(f64::min, f64::INFINITY, |p| p.0).log10().floor() + 1.0),
        y0: lx(f64::min, f64::INFINITY, |p| p.1).log10().floor(),
        y1: lx(f64::max, 0.0, |p| p.1).log10().ceil() + 1.0,
    };
    let (pl, pr, pt, pb) = (LEFT, W - RIGHT, TOP, H - BOTTOM);
    let _ = writeln!(s, "<rect x=\"{pl}\" y=\"{pt}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>", pr - pl, pb - pt);
    for d in (ax.x0 as i32)..=(ax.x1 as i32) {
        let x = ax.px(10f64.powi(d));
        let _ = writeln!(s, "<line x1=\"{x:.1}\" y1=\"{pt}\" x2=\"{x:.1}\" y2=\"{pb}\" stroke=\"#ddd\"/>");
        let _ = writeln!(s, "<text x=\"{x:.1}\" y=\"{}\" text-anchor=\"middle\">1e{d}</text>", pb + 18.0);
    }
    for d in (ax.y0 as i32)..=(ax.y1 as i32) {
        let y = ax.py(10f64.powi(d));
        let _ = writeln!(s, "<line x1=\"{pl}\" y1=\"{y:.1}\" x2=\"{pr}\" y2=\"{y:.1}\" stroke=\"#ddd\"/>");
        let _ = writeln!(s, "<text x=\"{}\" y=\"{:.1}\" text-anchor=\"end\">1e{d}</text>", pl - 6.0, y + 4.0);
    }
    let _ = writeln!(s, "<text x=\"{:.1}\" y=\"{}\" text-anchor=\"middle\">N (time steps)</text>", (pl + pr) / 2.0, H - 15.0);
    let _ = writeln!(
        s,
        "<text x=\"20\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 20 {:.1})\">max-norm error</text>",
        (pt + pb) / 2.0,
        (pt + pb) / 2.0
    );
    let _ = writeln!(s, "<clipPath id=\"plot\"><rect x=\"{pl}\" y=\"{pt}\" width=\"{}\" height=\"{}\"/></clipPath>", pr - pl, pb - pt);
    let mut legend: Vec<(String, String, &str)> = Vec::new();
    if let Some((n0, e0)) = slope_anchor(report) {
        let n1 = 10f64.powf(ax.x1);
        for (i, p) in SLOPES.iter().enumerate() {
            let e1 = e0 * (n0 / n1).powi(*p);
            let dash = if i == 0 { "6,4" } else { "2,3" };
            let _ = writeln!(
                s,
                "<line clip-path=\"url(#plot)\" x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"gray\" stroke-dasharray=\"{dash}\"/>",
                ax.px(n0),
                ax.py(e0),
                ax.px(n1),
                ax.py(e1)
            );
            legend.push((format!("slope {p}"), "gray".into(), dash));
        }
    }
    for (i, (name, pts)) in data.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let path: Vec<String> = pts.iter().map(|&(n, e)| format!("{:.1},{:.1}", ax.px(n), ax.py(e))).collect();
        let _ = writeln!(s, "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>", path.join(" "));
        for &(n, e) in pts {
            let _ = writeln!(s, "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"3\" fill=\"{color}\"/>", ax.px(n), ax.py(e));
        }
        legend.insert(i, (name.clone(), color.into(), ""));
    }
    for (i, (label, color, dash)) in legend.iter().enumerate() {
        let y = pt + 14.0 + 20.0 * i as f64;
        let x = pr + 12.0;
        let _ = writeln!(
            s,
            "<line x1=\"{x}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"{color}\" stroke-width=\"1.5\" stroke-dasharray=\"{dash}\"/>",
            x + 24.0
        );
        let _ = writeln!(s, "<text x=\"{}\" y=\"{}\">{label}</text>", x + 30.0, y + 4.0);
    }
    s.push_str("</svg>\n");
    s
}
