//! The filtering engine against a direct transcription of the ordering rule:
//! gather the clamped 3x3 neighborhood, sum the measure over every pair in
//! index order, keep the first extreme sample.

use proptest::prelude::*;
use rvf_core::measures::{cosine, eval_cfs, minkowski};
use rvf_core::{
    eval_measure, filter_d2sq_shortcut, filter_image, filter_image_serial, Criterion, Execution,
    FilterSpec, Image, MeasureId, MeasureSpec, Orientation, PreparedFilter, Rgb, WindowSize,
};

fn neighborhood(img: &Image, r: usize, c: usize) -> Vec<(Rgb, (usize, usize))> {
    let mut out = Vec::with_capacity(9);
    for dr in -1i64..=1 {
        for dc in -1i64..=1 {
            let rr = (r as i64 + dr).clamp(0, img.rows() as i64 - 1) as usize;
            let cc = (c as i64 + dc).clamp(0, img.cols() as i64 - 1) as usize;
            out.push((img.get(rr, cc), (rr, cc)));
        }
    }
    out
}

fn pick(scores: &[f64], orientation: Orientation) -> usize {
    let mut best = 0;
    for i in 1..scores.len() {
        let better = match orientation {
            Orientation::Minimize => scores[i] < scores[best],
            Orientation::Maximize => scores[i] > scores[best],
        };
        if better {
            best = i;
        }
    }
    best
}

fn oracle(img: &Image, criterion: &Criterion) -> Image {
    Image::from_fn(img.rows(), img.cols(), |r, c| {
        let w = neighborhood(img, r, c);
        let sum = |f: &dyn Fn(usize, usize) -> f64, i: usize| {
            let mut acc = 0.0;
            for j in 0..w.len() {
                acc += f(i, j);
            }
            acc
        };
        let scores: Vec<f64> = (0..w.len())
            .map(|i| match criterion {
                Criterion::Measure(MeasureSpec::Cfs { c, t }) => {
                    sum(&|i, j| eval_cfs(w[i].0, w[i].1, w[j].0, w[j].1, *c, *t), i)
                }
                Criterion::Measure(m) => sum(&|i, j| eval_measure(m, w[i].0, w[j].0).unwrap(), i),
                Criterion::Ddf { p } => {
                    sum(&|i, j| minkowski(w[i].0, w[j].0, *p), i)
                        * sum(&|i, j| cosine(w[i].0, w[j].0), i)
                }
            })
            .collect();
        w[pick(&scores, criterion.orientation())].0
    })
}

fn criteria() -> Vec<Criterion> {
    let mut out: Vec<Criterion> = MeasureId::ALL.into_iter().map(Criterion::from).collect();
    out.push("fms:K=8".parse().unwrap());
    out.push("cfs:C=20,t=1.5".parse().unwrap());
    out.push("ddf".parse().unwrap());
    out.push("ddf:p=1".parse().unwrap());
    out.push("ddf:p=inf".parse().unwrap());
    out
}

fn pixel() -> impl Strategy<Value = Rgb> {
    prop_oneof![
        any::<[u8; 3]>().prop_map(Rgb),
        prop::sample::select(vec![0u8, 1, 128, 255]).prop_flat_map(|a| {
            prop::sample::select(vec![0u8, 1, 255]).prop_map(move |b| Rgb::new(a, b, a))
        }),
    ]
}

fn image() -> impl Strategy<Value = Image> {
    (1usize..7, 1usize..7).prop_flat_map(|(rows, cols)| {
        prop::collection::vec(pixel(), rows * cols)
            .prop_map(move |px| Image::from_pixels(rows, cols, px).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn engine_matches_oracle(img in image()) {
        for criterion in criteria() {
            let spec = FilterSpec::new(criterion);
            let expected = oracle(&img, &criterion);
            prop_assert_eq!(&filter_image_serial(&img, &spec).unwrap(), &expected, "{}", criterion);
            prop_assert_eq!(&filter_image(&img, &spec).unwrap(), &expected, "{}", criterion);
        }
    }

    #[test]
    fn d2sq_routes_agree(img in image()) {
        let spec = FilterSpec::new(MeasureId::D2Sq);
        let generic = PreparedFilter::new(&spec).unwrap().pairwise_only();
        prop_assert_eq!(
            filter_d2sq_shortcut(&img, WindowSize::DEFAULT),
            generic.run(&img, Execution::Serial).unwrap()
        );
    }
}

#[test]
fn larger_windows_match_oracle_shape() {
    // 5x5 windows: every output must still come from its own neighborhood.
    let img = Image::from_fn(9, 11, |r, c| {
        Rgb::new((r * 29) as u8, (c * 23) as u8, (r * c) as u8)
    });
    let window = WindowSize::from_side(5).unwrap();
    for criterion in criteria() {
        let out = filter_image(&img, &FilterSpec::new(criterion).with_window(window)).unwrap();
        for r in 0..img.rows() {
            for c in 0..img.cols() {
                let found = (r.saturating_sub(2)..=(r + 2).min(img.rows() - 1)).any(|rr| {
                    (c.saturating_sub(2)..=(c + 2).min(img.cols() - 1))
                        .any(|cc| img.get(rr, cc) == out.get(r, c))
                });
                assert!(found, "{criterion} at ({r}, {c})");
            }
        }
    }
}
