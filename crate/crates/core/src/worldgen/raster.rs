use std::io::Cursor;

use image::{ImageFormat, RgbImage};

use super::{Biome, WorldMap};
use crate::error::Result;
use crate::geometry::Point;

/// Fixed biome colours shared by rasters, trail overlays and the UI.
pub fn palette(biome: Biome) -> [u8; 3] {
    match biome {
        Biome::Ocean => [26, 68, 128],
        Biome::Lake => [70, 130, 180],
        Biome::Coast => [240, 220, 170],
        Biome::Plains => [130, 180, 90],
        Biome::Forest => [50, 120, 60],
        Biome::Desert => [210, 190, 130],
        Biome::Swamp => [90, 110, 70],
        Biome::Tundra => [200, 200, 210],
        Biome::Mountain => [140, 130, 120],
    }
}

/// Square RGB raster, row-major, row 0 at the north edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster {
    pub size: usize,
    pub pixels: Vec<u8>,
}

impl Raster {
    pub fn empty(size: usize) -> Self {
        Self {
            size,
            pixels: vec![0; size * size * 3],
        }
    }

    pub fn pixel(&self, row: usize, col: usize) -> [u8; 3] {
        let k = (row * self.size + col) * 3;
        [self.pixels[k], self.pixels[k + 1], self.pixels[k + 2]]
    }

    /// Map coordinate sampled by pixel `(row, col)`.
    pub fn pixel_center(size: usize, row: usize, col: usize) -> Point {
        let s = size as f64;
        Point::new((col as f64 + 0.5) / s, 1.0 - (row as f64 + 0.5) / s)
    }

    pub fn to_image(&self) -> RgbImage {
        RgbImage::from_raw(self.size as u32, self.size as u32, self.pixels.clone())
            .expect("raster buffer matches its size")
    }
}

/// Rasterizes at the map's configured size.
pub fn rasterize(map: &WorldMap) -> Raster {
    rasterize_at(map, map.config.raster_size)
}

pub fn rasterize_at(map: &WorldMap, size: usize) -> Raster {
    let mut raster = Raster::empty(size);
    for row in 0..size {
        for col in 0..size {
            let color = palette(map.biome_at(Raster::pixel_center(size, row, col)));
            let k = (row * size + col) * 3;
            raster.pixels[k..k + 3].copy_from_slice(&color);
        }
    }
    raster
}

pub fn encode_png(image: &RgbImage) -> Result<Vec<u8>> {
    let mut out = Cursor::new(Vec::new());
    image.write_to(&mut out, ImageFormat::Png)?;
    Ok(out.into_inner())
}

/// PNG of the map at `size` pixels per side.
pub fn render_png(map: &WorldMap, size: usize) -> Result<Vec<u8>> {
    encode_png(&rasterize_at(map, size).to_image())
}
