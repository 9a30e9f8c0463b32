// Positive-argument branch of lgamma adapted from FreeBSD msun e_lgamma_r.c:
//
// ====================================================
// Copyright (C) 1993 by Sun Microsystems, Inc. All rights reserved.
//
// Developed at SunSoft, a Sun Microsystems, Inc. business.
// Permission to use, copy, modify, and distribute this
// software is freely granted, provided that this notice
// is preserved.
// ====================================================
//
// Method: reduce 0 < x < 8 into [1.5, 2.5] (or [0.9, 1.5]) through
// lgamma(1+s) = log(s) + lgamma(s); use a minimax polynomial around the
// minimum 1.4616..., a rational approximation on [2, 3] and, for x >= 8,
// the Stirling-type expansion in 1/x.

use crate::error::{Error, Result};

const A: [f64; 12] = [
    7.72156649015328655494e-02,
    3.22467033424113591611e-01,
    6.73523010531292681824e-02,
    2.05808084325167332806e-02,
    7.38555086081402883957e-03,
    2.89051383673415629091e-03,
    1.19270763183362067845e-03,
    5.10069792153511336608e-04,
    2.20862790713908385557e-04,
    1.08011567247583939954e-04,
    2.52144565451257326939e-05,
    4.48640949618915160150e-05,
];
const TC: f64 = 1.46163214496836224576e+00;
const TF: f64 = -1.21486290535849611461e-01;
const TT: f64 = -3.63867699703950536541e-18;
const T: [f64; 15] = [
    4.83836122723810047042e-01,
    -1.47587722994593911752e-01,
    6.46249402391333854778e-02,
    -3.27885410759859649565e-02,
    1.79706750811820387126e-02,
    -1.03142241298341437450e-02,
    6.10053870246291332635e-03,
    -3.68452016781138256760e-03,
    2.25964780900612472250e-03,
    -1.40346469989232843813e-03,
    8.81081882437654011382e-04,
    -5.38595305356740546715e-04,
    3.15632070903625950361e-04,
    -3.12754168375120860518e-04,
    3.35529192635519073543e-04,
];
const U: [f64; 6] = [
    -7.72156649015328655494e-02,
    6.32827064025093366517e-01,
    1.45492250137234768737e+00,
    9.77717527963372745603e-01,
    2.28963728064692451092e-01,
    1.33810918536787660377e-02,
];
const V: [f64; 6] = [
    1.0,
    2.45597793713041134822e+00,
    2.12848976379893395361e+00,
    7.69285150456672783825e-01,
    1.04222645593369134254e-01,
    3.21709242282423911810e-03,
];
const S: [f64; 7] = [
    -7.72156649015328655494e-02,
    2.14982415960608852501e-01,
    3.25778796408930981787e-01,
    1.46350472652464452805e-01,
    2.66422703033638609560e-02,
    1.84028451407337715652e-03,
    3.19475326584100867617e-05,
];
const R: [f64; 7] = [
    1.0,
    1.39200533467621045958e+00,
    7.21935547567138069525e-01,
    1.71933865632803078993e-01,
    1.86459191715652901344e-02,
    7.77942496381893596434e-04,
    7.32668430744625636189e-06,
];
const W: [f64; 7] = [
    4.18938533204672725052e-01,
    8.33333333333329678849e-02,
    -2.77777777728775536470e-03,
    7.93650558643019558500e-04,
    -5.95187557450339963135e-04,
    8.36339918996282139126e-04,
    -1.63092934096575273989e-03,
];

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
}

/// `log Γ(x)` for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::NonPositive {
            name: "log_gamma argument",
            value: x,
        });
    }
    if x.is_infinite() {
        return Ok(f64::INFINITY);
    }
    if x < 2f64.powi(-70) {
        return Ok(-x.ln());
    }
    if x == 1.0 || x == 2.0 {
        return Ok(0.0);
    }
    let r = if x < 2.0 {
        // 0 < x < 2
        let (mut r, y, branch) = if x <= 0.9 {
            let r = -x.ln();
            if x >= 0.7316 {
                (r, 1.0 - x, 0)
            } else if x >= 0.23164 {
                (r, x - (TC - 1.0), 1)
            } else {
                (r, x, 2)
            }
        } else if x >= 1.7316 {
            (0.0, 2.0 - x, 0)
        } else if x >= 1.23164 {
            (0.0, x - TC, 1)
        } else {
            (0.0, x - 1.0, 2)
        };
        match branch {
            0 => {
                let z = y * y;
                let p1 = A[0] + z * (A[2] + z * (A[4] + z * (A[6] + z * (A[8] + z * A[10]))));
                let p2 = z * (A[1] + z * (A[3] + z * (A[5] + z * (A[7] + z * (A[9] + z * A[11])))));
                r += y * p1 + p2 - 0.5 * y;
            }
            1 => {
                let z = y * y;
                let w = z * y;
                let p1 = T[0] + w * (T[3] + w * (T[6] + w * (T[9] + w * T[12])));
                let p2 = T[1] + w * (T[4] + w * (T[7] + w * (T[10] + w * T[13])));
                let p3 = T[2] + w * (T[5] + w * (T[8] + w * (T[11] + w * T[14])));
                let p = z * p1 - (TT - w * (p2 + y * p3));
                r += TF + p;
            }
            _ => {
                let p1 = y * horner(&U, y);
                let p2 = horner(&V, y);
                r += -0.5 * y + p1 / p2;
            }
        }
        r
    } else if x < 8.0 {
        let i = x.floor();
        let y = x - i;
        let p = y * horner(&S, y);
        let q = horner(&R, y);
        let mut r = 0.5 * y + p / q;
        // lgamma(1 + s) = log(s) + lgamma(s)
        let mut z = 1.0;
        let mut shift = i - 1.0;
        while shift >= 2.0 {
            z *= y + shift;
            shift -= 1.0;
        }
        if i >= 3.0 {
            r += z.ln();
        }
        r
    } else if x < 2f64.powi(58) {
        let t = x.ln();
        let z = 1.0 / x;
        let y = z * z;
        let w = W[0] + z * (W[1] + y * (W[2] + y * (W[3] + y * (W[4] + y * (W[5] + y * W[6])))));
        (x - 0.5) * (t - 1.0) + w
    } else {
        x * (x.ln() - 1.0)
    };
    Ok(r)
}
