//! Deterministic synthetic HDR test scenes.
//!
//! The scenes combine structured regions (buildings, ground, sky), colorful
//! patches, and small very bright sources with halos, covering roughly five
//! decades of luminance. They are procedurally generated so tests and demos
//! run without image assets.

use crate::color::builtin;
use crate::image::TristimulusImage;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SceneKind {
    /// Dark street with lit building windows and street lamps.
    NightStreet,
    /// Bright sky gradient with a sun disc over a dark textured skyline.
    SunsetSkyline,
    /// Mid-gray courtyard with colorful panels and a bright doorway.
    Courtyard,
}

impl SceneKind {
    pub fn all() -> [SceneKind; 3] {
        [
            SceneKind::NightStreet,
            SceneKind::SunsetSkyline,
            SceneKind::Courtyard,
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            SceneKind::NightStreet => "night_street",
            SceneKind::SunsetSkyline => "sunset_skyline",
            SceneKind::Courtyard => "courtyard",
        }
    }

    pub fn parse(s: &str) -> Option<SceneKind> {
        Some(match s {
            "night_street" => SceneKind::NightStreet,
            "sunset_skyline" => SceneKind::SunsetSkyline,
            "courtyard" => SceneKind::Courtyard,
            _ => return None,
        })
    }

    fn seed(&self) -> u64 {
        match self {
            SceneKind::NightStreet => 11,
            SceneKind::SunsetSkyline => 23,
            SceneKind::Courtyard => 37,
        }
    }
}

/// Smooth value noise on a coarse lattice, bilinearly interpolated.
struct ValueNoise {
    cells_x: usize,
    cells_y: usize,
    values: Vec<f64>,
}

impl ValueNoise {
    fn new(rng: &mut ChaCha8Rng, cells_x: usize, cells_y: usize) -> Self {
        let values = (0..(cells_x + 1) * (cells_y + 1))
            .map(|_| rng.gen_range(0.0..1.0))
            .collect();
        ValueNoise {
            cells_x,
            cells_y,
            values,
        }
    }

    fn sample(&self, u: f64, v: f64) -> f64 {
        let x = (u.clamp(0.0, 1.0)) * self.cells_x as f64;
        let y = (v.clamp(0.0, 1.0)) * self.cells_y as f64;
        let x0 = (x.floor() as usize).min(self.cells_x - 1);
        let y0 = (y.floor() as usize).min(self.cells_y - 1);
        let fx = x - x0 as f64;
        let fy = y - y0 as f64;
        let stride = self.cells_x + 1;
        let at = |cx: usize, cy: usize| self.values[cy * stride + cx];
        let top = at(x0, y0) * (1.0 - fx) + at(x0 + 1, y0) * fx;
        let bot = at(x0, y0 + 1) * (1.0 - fx) + at(x0 + 1, y0 + 1) * fx;
        top * (1.0 - fy) + bot * fy
    }
}

struct Light {
    x: f64,
    y: f64,
    radius: f64,
    intensity: f64,
    color: [f64; 3],
}

fn add_light(rgb: &mut [f64; 3], light: &Light, px: f64, py: f64) {
    let d2 = (px - light.x).powi(2) + (py - light.y).powi(2);
    let r2 = light.radius * light.radius;
    if d2 < r2 {
        for k in 0..3 {
            rgb[k] += light.intensity * light.color[k];
        }
    } else {
        // Halo: inverse-square falloff outside the core.
        let falloff = r2 / d2;
        let halo = light.intensity * 0.04 * falloff;
        for k in 0..3 {
            rgb[k] += halo * light.color[k];
        }
    }
}

/// Generates one of the procedural HDR scenes. Pixel values are linear RGB
/// radiances in cd/m² (converted to XYZ; the returned image has luminance
/// scale 1), spanning roughly 0.01 to 2000 cd/m².
pub fn synthetic_scene(kind: SceneKind, width: usize, height: usize) -> TristimulusImage {
    let mut rng = ChaCha8Rng::seed_from_u64(kind.seed());
    let texture = ValueNoise::new(&mut rng, 12, 9);
    let fine = ValueNoise::new(&mut rng, 37, 29);

    let mut lights = Vec::new();
    let palette: [[f64; 3]; 6] = [
        [0.9, 0.3, 0.2],
        [0.2, 0.6, 0.9],
        [0.85, 0.75, 0.25],
        [0.3, 0.8, 0.4],
        [0.7, 0.35, 0.8],
        [0.9, 0.55, 0.3],
    ];

    let (n_lights, light_intensity) = match kind {
        SceneKind::NightStreet => (7, 900.0),
        SceneKind::SunsetSkyline => (1, 2000.0),
        SceneKind::Courtyard => (3, 400.0),
    };
    for _ in 0..n_lights {
        lights.push(Light {
            x: rng.gen_range(0.05..0.95),
            y: rng.gen_range(0.05..0.6),
            radius: rng.gen_range(0.008..0.03),
            intensity: light_intensity * rng.gen_range(0.5..1.5),
            color: [
                rng.gen_range(0.7..1.0),
                rng.gen_range(0.6..1.0),
                rng.gen_range(0.4..1.0),
            ],
        });
    }

    // Building layout shared by the street/skyline scenes.
    let n_buildings = 6;
    let building_tops: Vec<f64> = (0..n_buildings)
        .map(|_| rng.gen_range(0.25..0.65))
        .collect();
    let building_colors: Vec<[f64; 3]> = (0..n_buildings)
        .map(|i| palette[i % palette.len()])
        .collect();

    let m_rgb_to_xyz = builtin("srgb_to_xyz");
    TristimulusImage::from_fn(width, height, 1.0, |r, c| {
        let u = c as f64 / (width - 1).max(1) as f64;
        let v = r as f64 / (height - 1).max(1) as f64;
        let tex = 0.6 + 0.8 * texture.sample(u, v);
        let grain = 0.85 + 0.3 * fine.sample(u, v);

        let mut rgb = match kind {
            SceneKind::NightStreet => {
                let building = ((u * n_buildings as f64) as usize).min(n_buildings - 1);
                if v > building_tops[building] {
                    // Facade: dim colored wall with texture.
                    let base = building_colors[building];
                    let lum = 1.2 * tex * grain;
                    [base[0] * lum, base[1] * lum, base[2] * lum]
                } else {
                    // Night sky: very dark blue gradient.
                    let sky = 0.02 + 0.06 * (1.0 - v);
                    [0.4 * sky, 0.5 * sky, sky]
                }
            }
            SceneKind::SunsetSkyline => {
                let building = ((u * n_buildings as f64) as usize).min(n_buildings - 1);
                if v > 0.55 + 0.25 * (building_tops[building] - 0.45) {
                    // Silhouetted foreground, nearly black with texture.
                    let lum = 0.05 * tex;
                    [lum * 0.8, lum * 0.7, lum]
                } else {
                    // Sky: warm-to-cool vertical gradient, bright.
                    let warm = [1.0, 0.45 + 0.3 * v, 0.25 + 0.5 * v];
                    let lum = 30.0 + 320.0 * (1.0 - v) * grain;
                    [warm[0] * lum, warm[1] * lum, warm[2] * lum]
                }
            }
            SceneKind::Courtyard => {
                let panel_x = (u * 4.0) as usize;
                let panel_y = (v * 3.0) as usize;
                if u < 0.18 {
                    // Shadowed colonnade along the left edge.
                    let lum = 0.03 * tex * grain;
                    [lum * 0.9, lum * 0.95, lum * 1.1]
                } else if v > 0.7 {
                    // Checkerboard ground.
                    let check = ((u * 10.0) as usize + (v * 10.0) as usize) % 2;
                    let lum = if check == 0 { 6.0 } else { 14.0 } * grain;
                    [lum, lum, lum]
                } else {
                    let color = palette[(panel_x + 4 * panel_y) % palette.len()];
                    let lum = 20.0 * tex * grain;
                    [color[0] * lum, color[1] * lum, color[2] * lum]
                }
            }
        };

        for light in &lights {
            add_light(&mut rgb, light, u, v);
        }

        let mut xyz = m_rgb_to_xyz.apply(rgb);
        for k in 0..3 {
            xyz[k] = xyz[k].max(0.0);
        }
        xyz
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenes_are_deterministic() {
        for kind in SceneKind::all() {
            let a = synthetic_scene(kind, 64, 48);
            let b = synthetic_scene(kind, 64, 48);
            assert_eq!(a.data(), b.data());
        }
    }

    #[test]
    fn scenes_are_hdr_and_valid() {
        for kind in SceneKind::all() {
            let img = synthetic_scene(kind, 96, 72);
            let y = img.channel(1);
            let (lo, hi) = y.min_max();
            assert!(lo >= 0.0);
            assert!(
                hi / lo.max(1e-3) > 1e3,
                "{:?} spans too little dynamic range: {lo}..{hi}",
                kind
            );
            assert!(img.data().iter().all(|p| p.iter().all(|v| v.is_finite())));
        }
    }
}
