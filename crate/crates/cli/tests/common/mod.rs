//! Helpers shared by the CLI and acceptance test targets.
#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

use zoomgrid::{Image, QPProblem};

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_zoomgrid"))
}

pub fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("spawn zoomgrid");
    assert!(
        out.status.success(),
        "command failed: {:?}\nstderr: {}",
        cmd,
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

/// Deterministic synthetic frame used across tests.
pub fn synthetic_frame(side: usize) -> Image {
    Image::from_fn(side, side, 3, |x, y, c| {
        let fx = x as f64 / (side - 1) as f64;
        let fy = y as f64 / (side - 1) as f64;
        match c {
            0 => fx,
            1 => fy,
            _ => ((x / 16 + y / 16) % 2) as f64,
        }
    })
    .expect("valid frame")
}

/// Independent P6 encoder (duplicates the writer on purpose, as a format
/// oracle).
pub fn encode_p6(img: &Image) -> Vec<u8> {
    assert_eq!(img.channels(), 3);
    let mut out = format!("P6\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend(
        img.data()
            .iter()
            .map(|&v| (v * 255.0).round().clamp(0.0, 255.0) as u8),
    );
    out
}

pub fn write_p6(path: &Path, img: &Image) {
    std::fs::write(path, encode_p6(img)).expect("write ppm");
}

pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

/// Projected gradient descent on the equality-constrained program, kept
/// independent of the library's KKT path. Feasible start, Nesterov
/// momentum with restart, stopping on the projected-gradient norm.
pub fn pgd_solve(prob: &QPProblem, tol: f64, max_iter: usize) -> Vec<f64> {
    let (m, n) = (prob.m, prob.n);
    let dim = m + n;
    let q_scale = 1.0 + prob.q.iter().fold(0.0f64, |a, v| a.max(v.abs()));

    // Lipschitz bound from the max absolute row sum
    let lip = (0..dim)
        .map(|i| prob.p[i * dim..(i + 1) * dim].iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0f64, f64::max);

    let project = |g: &mut [f64]| {
        let mean_r = g[..m].iter().sum::<f64>() / m as f64;
        let mean_c = g[m..].iter().sum::<f64>() / n as f64;
        for v in &mut g[..m] {
            *v -= mean_r;
        }
        for v in &mut g[m..] {
            *v -= mean_c;
        }
    };
    let grad = |d: &[f64]| -> Vec<f64> {
        let mut g = prob.q.clone();
        for i in 0..dim {
            for j in 0..dim {
                g[i] += prob.p[i * dim + j] * d[j];
            }
        }
        g
    };

    let mut d: Vec<f64> = (0..dim)
        .map(|i| {
            if i < m {
                prob.b_eq[0] / m as f64
            } else {
                prob.b_eq[1] / n as f64
            }
        })
        .collect();
    let mut y = d.clone();
    let mut t = 1.0f64;

    for _ in 0..max_iter {
        let mut g = grad(&y);
        project(&mut g);
        let mut d_new = y.clone();
        for i in 0..dim {
            d_new[i] -= g[i] / lip;
        }
        let t_new = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let momentum = (t - 1.0) / t_new;
        let restart = g
            .iter()
            .zip(d_new.iter().zip(&d))
            .map(|(gi, (a, b))| gi * (a - b))
            .sum::<f64>()
            > 0.0;
        for i in 0..dim {
            y[i] = d_new[i] + momentum * (d_new[i] - d[i]);
        }
        if restart {
            y.copy_from_slice(&d_new);
            t = 1.0;
        } else {
            t = t_new;
        }
        d = d_new;

        let mut gm = grad(&d);
        project(&mut gm);
        let norm = gm.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if norm <= tol * q_scale {
            return d;
        }
    }
    panic!("projected gradient did not converge to {tol}");
}
