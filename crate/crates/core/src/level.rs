//! Tile grids, the text format, and static content analysis.
//!
//! Rows are stored top-first, matching the text format: row 0 is the top of
//! the screen and `rows - 1` is the bottom. A level is immutable once built.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::error::LevelError;
use crate::sim::EventType;

/// Default segment width in columns.
pub const SEGMENT_COLS: usize = 28;
/// Default segment height in rows.
pub const SEGMENT_ROWS: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TileKind {
    Empty,
    /// Ground or block.
    Solid,
    Coin,
    /// Enemy spawn marker; the cell itself is empty space.
    Enemy,
    /// One-way platform, solid only from above.
    Platform,
}

impl TileKind {
    pub const ALL: [TileKind; 5] = [
        TileKind::Empty,
        TileKind::Solid,
        TileKind::Coin,
        TileKind::Enemy,
        TileKind::Platform,
    ];

    pub const fn to_char(self) -> char {
        match self {
            TileKind::Empty => '-',
            TileKind::Solid => 'X',
            TileKind::Coin => 'o',
            TileKind::Enemy => 'E',
            TileKind::Platform => '~',
        }
    }

    pub const fn from_char(c: char) -> Option<TileKind> {
        match c {
            '-' => Some(TileKind::Empty),
            'X' => Some(TileKind::Solid),
            'o' => Some(TileKind::Coin),
            'E' => Some(TileKind::Enemy),
            '~' => Some(TileKind::Platform),
            _ => None,
        }
    }

    /// Whether an actor standing on top of this tile is supported.
    pub const fn supports(self) -> bool {
        matches!(self, TileKind::Solid | TileKind::Platform)
    }
}

/// Grid position, `row` counted from the top.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
}

impl Cell {
    pub const fn new(row: usize, col: usize) -> Self {
        Cell { row, col }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Level {
    rows: usize,
    cols: usize,
    tiles: Vec<TileKind>,
}

impl fmt::Debug for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Level {}x{}\n{}", self.rows, self.cols, serialize_level(self))
    }
}

/// Non-fatal findings reported by [`parse_level_with_warnings`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelWarning {
    /// An enemy marker with nothing supporting it from below.
    FloatingEnemy(Cell),
}

impl Level {
    /// Builds a level from row-major tiles. Only the shape is checked here;
    /// spawn validity is checked by [`parse_level`] and by the simulator.
    pub fn new(rows: usize, cols: usize, tiles: Vec<TileKind>) -> Result<Self, LevelError> {
        if rows == 0 || cols == 0 {
            return Err(LevelError::EmptyLevel);
        }
        if tiles.len() != rows * cols {
            return Err(LevelError::ShapeMismatch {
                expected: rows * cols,
                got: tiles.len(),
            });
        }
        Ok(Level { rows, cols, tiles })
    }

    pub fn filled(rows: usize, cols: usize, kind: TileKind) -> Result<Self, LevelError> {
        Level::new(rows, cols, vec![kind; rows * cols])
    }

    /// Flat ground of the given height (in rows from the bottom), nothing else.
    pub fn flat(rows: usize, cols: usize, ground: usize) -> Result<Self, LevelError> {
        let mut tiles = vec![TileKind::Empty; rows * cols];
        for row in rows.saturating_sub(ground)..rows {
            for col in 0..cols {
                tiles[row * cols + col] = TileKind::Solid;
            }
        }
        Level::new(rows, cols, tiles)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn tiles(&self) -> &[TileKind] {
        &self.tiles
    }

    pub fn get(&self, row: usize, col: usize) -> TileKind {
        self.tiles[row * self.cols + col]
    }

    /// Signed lookup used by the physics; everything outside the grid is empty.
    pub fn tile_at(&self, row: i32, col: i32) -> TileKind {
        if row < 0 || col < 0 || row as usize >= self.rows || col as usize >= self.cols {
            TileKind::Empty
        } else {
            self.tiles[row as usize * self.cols + col as usize]
        }
    }

    /// Returns a copy with one tile replaced.
    pub fn with_tile(&self, row: usize, col: usize, kind: TileKind) -> Level {
        let mut next = self.clone();
        next.tiles[row * self.cols + col] = kind;
        next
    }

    pub fn cells_of(&self, kind: TileKind) -> impl Iterator<Item = Cell> + '_ {
        self.tiles
            .iter()
            .enumerate()
            .filter(move |(_, t)| **t == kind)
            .map(move |(i, _)| Cell::new(i / self.cols, i % self.cols))
    }

    pub fn count(&self, kind: TileKind) -> usize {
        self.tiles.iter().filter(|t| **t == kind).count()
    }

    /// Row of the tile Mario spawns on: the topmost Solid in column 0 that
    /// has an Empty tile directly above it.
    pub fn spawn_row(&self) -> Option<usize> {
        (1..self.rows)
            .find(|&row| self.get(row, 0) == TileKind::Solid && self.get(row - 1, 0) == TileKind::Empty)
    }

    pub fn validate_spawn(&self) -> Result<(), LevelError> {
        self.spawn_row().map(|_| ()).ok_or(LevelError::NoSpawn)
    }

    pub fn floating_enemies(&self) -> Vec<Cell> {
        self.cells_of(TileKind::Enemy)
            .filter(|c| c.row + 1 >= self.rows || !self.get(c.row + 1, c.col).supports())
            .collect()
    }

    /// Returns a copy with `n` Empty rows stacked on top.
    pub fn with_sky(&self, n: usize) -> Level {
        let mut tiles = vec![TileKind::Empty; n * self.cols];
        tiles.extend_from_slice(&self.tiles);
        Level {
            rows: self.rows + n,
            cols: self.cols,
            tiles,
        }
    }
}

pub fn parse_level(text: &str) -> Result<Level, LevelError> {
    parse_level_with_warnings(text).map(|(level, _)| level)
}

pub fn parse_level_with_warnings(text: &str) -> Result<(Level, Vec<LevelWarning>), LevelError> {
    let lines: Vec<&str> = text
        .lines()
        .map(|l| l.strip_suffix('\r').unwrap_or(l))
        .filter(|l| !l.is_empty())
        .collect();
    if lines.is_empty() {
        return Err(LevelError::EmptyLevel);
    }
    let cols = lines[0].chars().count();
    let mut tiles = Vec::with_capacity(cols * lines.len());
    for (row, line) in lines.iter().enumerate() {
        let got = line.chars().count();
        if got != cols {
            return Err(LevelError::RaggedRows {
                expected: cols,
                got,
                row,
            });
        }
        for (col, ch) in line.chars().enumerate() {
            let kind = TileKind::from_char(ch).ok_or(LevelError::UnknownTileChar { row, col, ch })?;
            tiles.push(kind);
        }
    }
    let level = Level::new(lines.len(), cols, tiles)?;
    level.validate_spawn()?;
    let warnings = level
        .floating_enemies()
        .into_iter()
        .map(LevelWarning::FloatingEnemy)
        .collect();
    Ok((level, warnings))
}

/// Rows joined with `\n`, no trailing newline.
pub fn serialize_level(level: &Level) -> String {
    let mut out = String::with_capacity((level.cols + 1) * level.rows);
    for row in 0..level.rows {
        if row > 0 {
            out.push('\n');
        }
        for col in 0..level.cols {
            out.push(level.get(row, col).to_char());
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ContentStats {
    pub n_monsters: usize,
    pub n_coins: usize,
    pub n_gaps: usize,
    pub max_gap_width: usize,
}

impl ContentStats {
    pub const CSV_HEADER: &'static str = "monsters,coins,gaps,max_gap_width";

    pub fn csv_row(&self) -> String {
        alloc::format!(
            "{},{},{},{}",
            self.n_monsters, self.n_coins, self.n_gaps, self.max_gap_width
        )
    }
}

/// A gap is a maximal run of columns that contain no Solid tile in any row.
pub fn content_stats(level: &Level) -> ContentStats {
    let mut n_gaps = 0;
    let mut max_gap_width = 0;
    let mut run = 0;
    for col in 0..level.cols {
        let has_solid = (0..level.rows).any(|row| level.get(row, col) == TileKind::Solid);
        if has_solid {
            run = 0;
        } else {
            if run == 0 {
                n_gaps += 1;
            }
            run += 1;
            max_gap_width = max_gap_width.max(run);
        }
    }
    ContentStats {
        n_monsters: level.count(TileKind::Enemy),
        n_coins: level.count(TileKind::Coin),
        n_gaps,
        max_gap_width,
    }
}

/// An event site to draw on top of a level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OverlayMark {
    pub cell: Cell,
    pub kind: EventType,
}

pub const fn event_glyph(kind: EventType) -> char {
    match kind {
        EventType::Stomp => 'S',
        EventType::Fall => 'F',
        EventType::Jump => 'J',
        EventType::Land => 'L',
        EventType::Collect => 'C',
        EventType::Lose => 'D',
        EventType::Win => 'W',
    }
}

/// Text render with event glyphs replacing the marked cells. Later marks
/// overwrite earlier ones on the same cell.
pub fn render_text(level: &Level, overlay: &[OverlayMark]) -> Result<String, LevelError> {
    let mut grid: Vec<char> = level.tiles.iter().map(|t| t.to_char()).collect();
    for mark in overlay {
        let Cell { row, col } = mark.cell;
        if row >= level.rows || col >= level.cols {
            return Err(LevelError::OverlayOutOfBounds { row, col });
        }
        grid[row * level.cols + col] = event_glyph(mark.kind);
    }
    let mut out = String::with_capacity((level.cols + 1) * level.rows);
    for (row, chunk) in grid.chunks(level.cols).enumerate() {
        if row > 0 {
            out.push('\n');
        }
        out.extend(chunk.iter());
    }
    Ok(out)
}
