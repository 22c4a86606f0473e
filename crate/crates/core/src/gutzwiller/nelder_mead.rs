//! Downhill simplex on the unit cube (coordinates clamped to [0, 1]).

pub(crate) struct Simplex {
    pub x: [f64; 3],
    pub f: f64,
}

pub(crate) fn minimize(f: &impl Fn(&[f64; 3]) -> f64, start: [f64; 3], step: f64, max_iter: usize) -> Simplex {
    let clamp = |mut p: [f64; 3]| {
        p.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
        p
    };
    let mut pts: Vec<[f64; 3]> = vec![clamp(start)];
    for k in 0..3 {
        let mut p = start;
        // step inward from a face so the simplex is never degenerate
        p[k] += if p[k] + step > 1.0 { -step } else { step };
        pts.push(clamp(p));
    }
    let mut vals: Vec<f64> = pts.iter().map(f).collect();

    for _ in 0..max_iter {
        let mut order = [0usize, 1, 2, 3];
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        let (best, worst, second) = (order[0], order[3], order[2]);
        if (vals[worst] - vals[best]).abs() <= 1e-14 * (1.0 + vals[best].abs()) {
            let spread =
                pts.iter().map(|p| (0..3).map(|k| (p[k] - pts[best][k]).abs()).fold(0.0, f64::max)).fold(0.0, f64::max);
            if spread < 1e-10 {
                break;
            }
        }
        let mut centroid = [0.0; 3];
        for &i in &order[..3] {
            for k in 0..3 {
                centroid[k] += pts[i][k] / 3.0;
            }
        }
        let along = |t: f64| clamp(std::array::from_fn(|k| centroid[k] + t * (pts[worst][k] - centroid[k])));
        let xr = along(-1.0);
        let fr = f(&xr);
        if fr < vals[best] {
            let xe = along(-2.0);
            let fe = f(&xe);
            if fe < fr {
                pts[worst] = xe;
                vals[worst] = fe;
            } else {
                pts[worst] = xr;
                vals[worst] = fr;
            }
        } else if fr < vals[second] {
            pts[worst] = xr;
            vals[worst] = fr;
        } else {
            let xc = if fr < vals[worst] { along(-0.5) } else { along(0.5) };
            let fc = f(&xc);
            if fc < vals[worst].min(fr) {
                pts[worst] = xc;
                vals[worst] = fc;
            } else {
                let b = pts[best];
                for i in 0..4 {
                    if i != best {
                        pts[i] = std::array::from_fn(|k| b[k] + 0.5 * (pts[i][k] - b[k]));
                        vals[i] = f(&pts[i]);
                    }
                }
            }
        }
    }
    let i = (0..4).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
    Simplex { x: pts[i], f: vals[i] }
}
