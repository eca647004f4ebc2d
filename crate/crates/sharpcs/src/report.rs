//! Standalone SVG line plots, written by hand so reports need no plotting
//! dependency and stay testable as XML.

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 78.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 46.0;
const MARGIN_BOTTOM: f64 = 58.0;

/// One curve: a label, y values (paired with the shared x grid), and a
/// stroke color.
#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub ys: Vec<f64>,
    pub color: String,
}

impl Series {
    pub fn new(label: impl Into<String>, ys: Vec<f64>, color: impl Into<String>) -> Self {
        Series { label: label.into(), ys, color: color.into() }
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn nice_num(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let a = x.abs();
    if (1e-3..1e4).contains(&a) {
        let s = format!("{x:.3}");
        let s = s.trim_end_matches('0').trim_end_matches('.').to_string();
        if s.is_empty() || s == "-" {
            "0".to_string()
        } else {
            s
        }
    } else {
        format!("{x:.1e}")
    }
}

/// Render a line plot with labeled axes. With `log_y` the y axis is log10
/// with decade ticks; nonpositive values are clamped to the smallest positive
/// value in the data (or 1e-16).
pub fn line_plot(
    title: &str,
    x_label: &str,
    y_label: &str,
    xs: &[f64],
    series: &[Series],
    log_y: bool,
) -> String {
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;

    let x_min = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let x_max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (x_min, x_max) = if !x_min.is_finite() || x_min == x_max {
        (x_min.min(0.0), x_min.max(1.0).max(x_min + 1.0))
    } else {
        (x_min, x_max)
    };

    let mut positive_floor = f64::INFINITY;
    for s in series {
        for &y in &s.ys {
            if y > 0.0 && y.is_finite() {
                positive_floor = positive_floor.min(y);
            }
        }
    }
    if !positive_floor.is_finite() {
        positive_floor = 1e-16;
    }
    let map_y_value = |y: f64| -> f64 {
        if log_y {
            y.max(positive_floor).log10()
        } else {
            y
        }
    };

    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for s in series {
        for &y in &s.ys {
            let v = map_y_value(y);
            if v.is_finite() {
                y_min = y_min.min(v);
                y_max = y_max.max(v);
            }
        }
    }
    if !y_min.is_finite() {
        y_min = 0.0;
        y_max = 1.0;
    }
    if (y_max - y_min).abs() < 1e-12 {
        y_min -= 0.5;
        y_max += 0.5;
    }

    let to_px = |x: f64, yv: f64| -> (f64, f64) {
        let px = MARGIN_LEFT + (x - x_min) / (x_max - x_min) * plot_w;
        let py = MARGIN_TOP + (y_max - yv) / (y_max - y_min) * plot_h;
        (px, py)
    };

    let mut svg = String::new();
    svg.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">{}</text>\n",
        WIDTH / 2.0,
        escape(title)
    ));

    // axes
    let (ax0, ay0) = (MARGIN_LEFT, MARGIN_TOP + plot_h);
    svg.push_str(&format!(
        "<line x1=\"{ax0}\" y1=\"{ay0}\" x2=\"{}\" y2=\"{ay0}\" stroke=\"black\"/>\n",
        MARGIN_LEFT + plot_w
    ));
    svg.push_str(&format!(
        "<line x1=\"{ax0}\" y1=\"{ay0}\" x2=\"{ax0}\" y2=\"{MARGIN_TOP}\" stroke=\"black\"/>\n"
    ));

    // x ticks
    let x_ticks = 6;
    for i in 0..=x_ticks {
        let x = x_min + (x_max - x_min) * i as f64 / x_ticks as f64;
        let (px, _) = to_px(x, y_min);
        svg.push_str(&format!(
            "<line x1=\"{px}\" y1=\"{ay0}\" x2=\"{px}\" y2=\"{}\" stroke=\"black\"/>\n",
            ay0 + 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{px}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
            ay0 + 18.0,
            nice_num(x)
        ));
    }

    // y ticks: decades in log mode, even splits otherwise
    let mut y_tick_values = Vec::new();
    if log_y {
        let lo = y_min.floor() as i64;
        let hi = y_max.ceil() as i64;
        let span = (hi - lo).max(1);
        let step = ((span as usize + 7) / 8).max(1) as i64;
        let mut d = lo;
        while d <= hi {
            y_tick_values.push(d as f64);
            d += step;
        }
    } else {
        let ticks = 6;
        for i in 0..=ticks {
            y_tick_values.push(y_min + (y_max - y_min) * i as f64 / ticks as f64);
        }
    }
    for &v in &y_tick_values {
        if v < y_min - 1e-9 || v > y_max + 1e-9 {
            continue;
        }
        let (_, py) = to_px(x_min, v);
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{py}\" x2=\"{ax0}\" y2=\"{py}\" stroke=\"black\"/>\n",
            ax0 - 5.0
        ));
        let label = if log_y { format!("1e{}", v as i64) } else { nice_num(v) };
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{}</text>\n",
            ax0 - 8.0,
            py + 4.0,
            label
        ));
    }

    // axis labels
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">{}</text>\n",
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 14.0,
        escape(x_label)
    ));
    svg.push_str(&format!(
        "<text x=\"20\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 20 {})\">{}</text>\n",
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0,
        escape(y_label)
    ));

    // curves
    for s in series {
        let mut points = String::new();
        for (x, y) in xs.iter().zip(&s.ys) {
            let v = map_y_value(*y);
            if !v.is_finite() {
                continue;
            }
            let (px, py) = to_px(*x, v);
            points.push_str(&format!("{px:.2},{py:.2} "));
        }
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.8\" points=\"{}\"/>\n",
            escape(&s.color),
            points.trim_end()
        ));
    }

    // legend
    for (i, s) in series.iter().enumerate() {
        let y = MARGIN_TOP + 14.0 + 16.0 * i as f64;
        let x = MARGIN_LEFT + plot_w - 150.0;
        svg.push_str(&format!(
            "<line x1=\"{x}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"{}\" stroke-width=\"1.8\"/>\n",
            x + 22.0,
            escape(&s.color)
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
            x + 28.0,
            y + 4.0,
            escape(&s.label)
        ));
    }

    svg.push_str("</svg>\n");
    svg
}

/// Minimal XML well-formedness check used to validate rendered reports:
/// one root, balanced tags, quoted attributes, no stray angle brackets.
pub fn check_well_formed_xml(text: &str) -> std::result::Result<(), String> {
    let mut stack: Vec<String> = Vec::new();
    let mut roots = 0;
    let mut rest = text.trim_start();
    if rest.starts_with("<?xml") {
        let end = rest.find("?>").ok_or("unterminated declaration")?;
        rest = &rest[end + 2..];
    }
    let mut chars = rest.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if c != '<' {
            if c == '>' {
                return Err(format!("stray '>' at byte {i}"));
            }
            continue;
        }
        let close = rest[i..].find('>').ok_or_else(|| format!("unterminated tag at byte {i}"))?;
        let tag = &rest[i + 1..i + close];
        if (tag.matches('"').count()) % 2 != 0 {
            return Err(format!("unbalanced quotes in tag '{tag}'"));
        }
        if let Some(name) = tag.strip_prefix('/') {
            let open = stack.pop().ok_or_else(|| format!("unmatched closing tag '{name}'"))?;
            if open != name.trim() {
                return Err(format!("tag mismatch: expected '{open}', found '{name}'"));
            }
        } else if !tag.ends_with('/') {
            let name: String = tag.split_whitespace().next().unwrap_or("").to_string();
            if stack.is_empty() {
                roots += 1;
            }
            stack.push(name);
        }
        // consume the tag body
        while let Some(&(j, _)) = chars.peek() {
            if j > i + close {
                break;
            }
            chars.next();
        }
    }
    if !stack.is_empty() {
        return Err(format!("unclosed tags: {stack:?}"));
    }
    if roots != 1 {
        return Err(format!("expected exactly one root element, found {roots}"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_well_formed_svg() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let s1 = Series::new("mean", xs.iter().map(|x| (x + 1.0).recip()).collect(), "#1f77b4");
        let s2 = Series::new("p90", xs.iter().map(|x| 2.0 / (x + 1.0)).collect(), "#d62728");
        for log_y in [false, true] {
            let svg = line_plot("demo", "n", "value", &xs, &[s1.clone(), s2.clone()], log_y);
            check_well_formed_xml(&svg).unwrap();
            assert!(svg.contains("<polyline"));
            assert!(svg.contains("demo"));
        }
    }

    #[test]
    fn survives_degenerate_inputs() {
        let svg = line_plot("flat", "x", "y", &[1.0], &[Series::new("s", vec![0.0], "#000000")], true);
        check_well_formed_xml(&svg).unwrap();
        let svg2 = line_plot("empty", "x", "y", &[], &[], false);
        check_well_formed_xml(&svg2).unwrap();
    }

    #[test]
    fn escapes_labels() {
        let svg = line_plot("a < b & c", "x", "y", &[0.0, 1.0], &[Series::new("s", vec![1.0, 2.0], "#000")], false);
        check_well_formed_xml(&svg).unwrap();
        assert!(svg.contains("a &lt; b &amp; c"));
    }
}
