//! 3×3 board state, win detection and the cell geometry the decision-tree
//! rules are phrased in.
//!
//! Cells are indexed `0..9` row-major. Display and text forms use 1-based
//! `(row,col)` coordinates where a human reads them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoardError {
    #[error("cell index {0} is outside 0..9")]
    CellOutOfRange(usize),
    #[error("cell {0} is already occupied")]
    Occupied(Cell),
    #[error("the game is already over")]
    GameOver,
    #[error("mark counts X={x} O={o} are impossible when {first} moves first")]
    BadParity { x: u32, o: u32, first: Mark },
    #[error("both players have a completed line")]
    BothWin,
    #[error("{0} has a completed line but did not make the last move")]
    WinnerNotLast(Mark),
    #[error("cannot parse board: {0}")]
    Parse(String),
    #[error("cell {cell} is not a {expected:?}")]
    ClassMismatch { cell: Cell, expected: CellClass },
    #[error("edges {0} and {1} are not neighbours")]
    NotNeighbours(Cell, Cell),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Cell(u8);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellClass {
    Corner,
    Edge,
    Centre,
}

impl Cell {
    pub const CENTRE: Cell = Cell(4);
    pub const ALL: [Cell; 9] = [
        Cell(0),
        Cell(1),
        Cell(2),
        Cell(3),
        Cell(4),
        Cell(5),
        Cell(6),
        Cell(7),
        Cell(8),
    ];
    pub const CORNERS: [Cell; 4] = [Cell(0), Cell(2), Cell(6), Cell(8)];
    pub const EDGES: [Cell; 4] = [Cell(1), Cell(3), Cell(5), Cell(7)];

    pub fn new(index: usize) -> Result<Cell, BoardError> {
        if index < 9 {
            Ok(Cell(index as u8))
        } else {
            Err(BoardError::CellOutOfRange(index))
        }
    }

    /// Builds a cell from 1-based `(row, col)` coordinates.
    pub fn from_row_col(row: usize, col: usize) -> Result<Cell, BoardError> {
        if !(1..=3).contains(&row) || !(1..=3).contains(&col) {
            return Err(BoardError::Parse(format!("({row},{col}) is off the board")));
        }
        Ok(Cell(((row - 1) * 3 + (col - 1)) as u8))
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// 0-based row.
    #[inline]
    pub fn row(self) -> usize {
        self.index() / 3
    }

    /// 0-based column.
    #[inline]
    pub fn col(self) -> usize {
        self.index() % 3
    }

    #[inline]
    fn bit(self) -> u16 {
        1 << self.0
    }

    pub fn class(self) -> CellClass {
        classify(self)
    }

    pub fn is_corner(self) -> bool {
        self.class() == CellClass::Corner
    }

    pub fn is_edge(self) -> bool {
        self.class() == CellClass::Edge
    }

    /// Chebyshev (king-move) distance.
    pub fn chebyshev(self, other: Cell) -> usize {
        self.row()
            .abs_diff(other.row())
            .max(self.col().abs_diff(other.col()))
    }

    pub fn euclidean(self, other: Cell) -> f64 {
        let dr = self.row() as f64 - other.row() as f64;
        let dc = self.col() as f64 - other.col() as f64;
        (dr * dr + dc * dc).sqrt()
    }
}

impl TryFrom<u8> for Cell {
    type Error = BoardError;

    fn try_from(value: u8) -> Result<Self, Self::Error> {
        Cell::new(value as usize)
    }
}

impl From<Cell> for u8 {
    fn from(cell: Cell) -> u8 {
        cell.0
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.row() + 1, self.col() + 1)
    }
}

pub fn classify(cell: Cell) -> CellClass {
    match cell.0 {
        4 => CellClass::Centre,
        0 | 2 | 6 | 8 => CellClass::Corner,
        _ => CellClass::Edge,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Mark {
    X,
    O,
}

impl Mark {
    pub fn opponent(self) -> Mark {
        match self {
            Mark::X => Mark::O,
            Mark::O => Mark::X,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Mark::X => 'X',
            Mark::O => 'O',
        }
    }
}

impl fmt::Display for Mark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

impl FromStr for Mark {
    type Err = BoardError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "X" | "x" => Ok(Mark::X),
            "O" | "o" => Ok(Mark::O),
            other => Err(BoardError::Parse(format!("unknown mark {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    XWin,
    OWin,
    Draw,
    Ongoing,
}

impl Outcome {
    pub fn winner(self) -> Option<Mark> {
        match self {
            Outcome::XWin => Some(Mark::X),
            Outcome::OWin => Some(Mark::O),
            _ => None,
        }
    }

    pub fn is_terminal(self) -> bool {
        self != Outcome::Ongoing
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Outcome::XWin => "XWin",
            Outcome::OWin => "OWin",
            Outcome::Draw => "Draw",
            Outcome::Ongoing => "Ongoing",
        };
        f.write_str(s)
    }
}

impl FromStr for Outcome {
    type Err = BoardError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "XWin" => Ok(Outcome::XWin),
            "OWin" => Ok(Outcome::OWin),
            "Draw" => Ok(Outcome::Draw),
            "Ongoing" => Ok(Outcome::Ongoing),
            other => Err(BoardError::Parse(format!("unknown outcome {other:?}"))),
        }
    }
}

/// The 8 lines as cell triples: rows, columns, diagonals.
pub const LINES: [[u8; 3]; 8] = [
    [0, 1, 2],
    [3, 4, 5],
    [6, 7, 8],
    [0, 3, 6],
    [1, 4, 7],
    [2, 5, 8],
    [0, 4, 8],
    [2, 4, 6],
];

const LINE_MASKS: [u16; 8] = {
    let mut masks = [0u16; 8];
    let mut i = 0;
    while i < 8 {
        masks[i] = (1 << LINES[i][0]) | (1 << LINES[i][1]) | (1 << LINES[i][2]);
        i += 1;
    }
    masks
};

const FULL: u16 = 0x1ff;

#[inline]
fn has_line(bits: u16) -> bool {
    LINE_MASKS.iter().any(|&m| m & !bits == 0)
}

/// A set of cells packed into nine bits. Iterates in ascending index order.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct CellSet(u16);

impl CellSet {
    pub const EMPTY: CellSet = CellSet(0);

    pub fn from_bits(bits: u16) -> CellSet {
        CellSet(bits & FULL)
    }

    pub fn bits(self) -> u16 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, cell: Cell) -> bool {
        self.0 & cell.bit() != 0
    }

    pub fn insert(&mut self, cell: Cell) {
        self.0 |= cell.bit();
    }

    pub fn remove(&mut self, cell: Cell) {
        self.0 &= !cell.bit();
    }

    pub fn intersection(self, other: CellSet) -> CellSet {
        CellSet(self.0 & other.0)
    }

    pub fn union(self, other: CellSet) -> CellSet {
        CellSet(self.0 | other.0)
    }

    pub fn is_subset(self, other: CellSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn corners() -> CellSet {
        Cell::CORNERS.into_iter().collect()
    }

    pub fn edges() -> CellSet {
        Cell::EDGES.into_iter().collect()
    }

    pub fn iter(self) -> CellSetIter {
        CellSetIter(self.0)
    }

    pub fn to_vec(self) -> Vec<Cell> {
        self.iter().collect()
    }
}

impl fmt::Debug for CellSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set()
            .entries(self.iter().map(|c| c.index()))
            .finish()
    }
}

impl FromIterator<Cell> for CellSet {
    fn from_iter<I: IntoIterator<Item = Cell>>(iter: I) -> Self {
        let mut set = CellSet::EMPTY;
        for cell in iter {
            set.insert(cell);
        }
        set
    }
}

impl IntoIterator for CellSet {
    type Item = Cell;
    type IntoIter = CellSetIter;

    fn into_iter(self) -> CellSetIter {
        self.iter()
    }
}

pub struct CellSetIter(u16);

impl Iterator for CellSetIter {
    type Item = Cell;

    fn next(&mut self) -> Option<Cell> {
        if self.0 == 0 {
            return None;
        }
        let idx = self.0.trailing_zeros() as u8;
        self.0 &= self.0 - 1;
        Some(Cell(idx))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for CellSetIter {}

/// One of the 8 symmetries of the square. Element 0 is the identity,
/// 1..=3 are clockwise quarter turns, 4..=7 are those turns applied after a
/// transpose about the main diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Symmetry(u8);

const SYMMETRY_TABLE: [[u8; 9]; 8] = {
    let mut table = [[0u8; 9]; 8];
    let mut k = 0;
    while k < 8 {
        let mut i = 0;
        while i < 9 {
            let (mut r, mut c) = (i / 3, i % 3);
            if k >= 4 {
                let t = r;
                r = c;
                c = t;
            }
            let mut turns = k % 4;
            while turns > 0 {
                // clockwise: (r, c) -> (c, 2 - r)
                let t = r;
                r = c;
                c = 2 - t;
                turns -= 1;
            }
            table[k][i] = (r * 3 + c) as u8;
            i += 1;
        }
        k += 1;
    }
    table
};

impl Symmetry {
    pub const IDENTITY: Symmetry = Symmetry(0);

    pub fn all() -> impl Iterator<Item = Symmetry> {
        (0..8).map(Symmetry)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn apply(self, cell: Cell) -> Cell {
        Cell(SYMMETRY_TABLE[self.index()][cell.index()])
    }

    pub fn apply_set(self, set: CellSet) -> CellSet {
        set.iter().map(|c| self.apply(c)).collect()
    }

    pub fn inverse(self) -> Symmetry {
        Symmetry::all()
            .find(|s| Cell::ALL.iter().all(|&c| s.apply(self.apply(c)) == c))
            .expect("every symmetry has an inverse")
    }
}

/// Game state: X and O occupancy plus which mark moved first.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Board {
    x: u16,
    o: u16,
    first: Mark,
}

impl Board {
    pub fn new(first: Mark) -> Board {
        Board { x: 0, o: 0, first }
    }

    /// Builds a board from explicit occupancy and validates reachability.
    pub fn from_cells(x: CellSet, o: CellSet, first: Mark) -> Result<Board, BoardError> {
        if let Some(cell) = x.intersection(o).iter().next() {
            return Err(BoardError::Occupied(cell));
        }
        let board = Board {
            x: x.bits(),
            o: o.bits(),
            first,
        };
        board.validate()?;
        Ok(board)
    }

    /// Parses the 9-character row-major text form (`X`, `O`, `.`), inferring
    /// the first mover from the mark counts. Equal counts default to X first.
    pub fn parse(s: &str) -> Result<Board, BoardError> {
        let (x, o) = parse_cells(s)?;
        let first = if o.len() > x.len() { Mark::O } else { Mark::X };
        Board::from_cells(x, o, first)
    }

    pub fn parse_with_first(s: &str, first: Mark) -> Result<Board, BoardError> {
        let (x, o) = parse_cells(s)?;
        Board::from_cells(x, o, first)
    }

    fn validate(&self) -> Result<(), BoardError> {
        let (x, o) = (self.x.count_ones(), self.o.count_ones());
        let (firsts, seconds) = match self.first {
            Mark::X => (x, o),
            Mark::O => (o, x),
        };
        if firsts < seconds || firsts - seconds > 1 {
            return Err(BoardError::BadParity {
                x,
                o,
                first: self.first,
            });
        }
        let (x_line, o_line) = (has_line(self.x), has_line(self.o));
        if x_line && o_line {
            return Err(BoardError::BothWin);
        }
        let last_mover = self.to_move().opponent();
        if self.move_count() > 0 {
            if x_line && last_mover != Mark::X {
                return Err(BoardError::WinnerNotLast(Mark::X));
            }
            if o_line && last_mover != Mark::O {
                return Err(BoardError::WinnerNotLast(Mark::O));
            }
        }
        Ok(())
    }

    pub fn first_mover(&self) -> Mark {
        self.first
    }

    pub fn move_count(&self) -> usize {
        (self.x | self.o).count_ones() as usize
    }

    pub fn to_move(&self) -> Mark {
        if self.move_count().is_multiple_of(2) {
            self.first
        } else {
            self.first.opponent()
        }
    }

    pub fn get(&self, cell: Cell) -> Option<Mark> {
        if self.x & cell.bit() != 0 {
            Some(Mark::X)
        } else if self.o & cell.bit() != 0 {
            Some(Mark::O)
        } else {
            None
        }
    }

    pub fn is_free(&self, cell: Cell) -> bool {
        (self.x | self.o) & cell.bit() == 0
    }

    pub fn empty_cells(&self) -> CellSet {
        CellSet(!(self.x | self.o) & FULL)
    }

    pub fn cells_of(&self, mark: Mark) -> CellSet {
        CellSet(self.bits_of(mark))
    }

    #[inline]
    fn bits_of(&self, mark: Mark) -> u16 {
        match mark {
            Mark::X => self.x,
            Mark::O => self.o,
        }
    }

    /// Places the side-to-move's mark on `cell`.
    pub fn place(&self, cell: Cell) -> Result<Board, BoardError> {
        if self.outcome().is_terminal() {
            return Err(BoardError::GameOver);
        }
        if !self.is_free(cell) {
            return Err(BoardError::Occupied(cell));
        }
        Ok(self.place_unchecked(cell))
    }

    /// Places without checking legality. Callers must pass an empty cell on an
    /// ongoing board.
    #[inline]
    pub fn place_unchecked(&self, cell: Cell) -> Board {
        let mut next = *self;
        match self.to_move() {
            Mark::X => next.x |= cell.bit(),
            Mark::O => next.o |= cell.bit(),
        }
        next
    }

    #[inline]
    pub fn has_line(&self, mark: Mark) -> bool {
        has_line(self.bits_of(mark))
    }

    pub fn outcome(&self) -> Outcome {
        if has_line(self.x) {
            Outcome::XWin
        } else if has_line(self.o) {
            Outcome::OWin
        } else if (self.x | self.o) == FULL {
            Outcome::Draw
        } else {
            Outcome::Ongoing
        }
    }

    /// Empty cells that complete a line for `mark`.
    pub fn winning_moves(&self, mark: Mark) -> CellSet {
        let own = self.bits_of(mark);
        let free = !(self.x | self.o) & FULL;
        let mut out = 0u16;
        for &m in &LINE_MASKS {
            let missing = m & !own;
            if missing.count_ones() == 1 && missing & free != 0 {
                out |= missing;
            }
        }
        CellSet(out)
    }

    /// Empty cells where `mark` would end up with two or more winning moves.
    pub fn fork_moves(&self, mark: Mark) -> CellSet {
        self.empty_cells()
            .iter()
            .filter(|&c| self.with_mark(c, mark).winning_moves(mark).len() >= 2)
            .collect()
    }

    /// The board with `mark` on `cell` regardless of turn order; used for
    /// threat analysis, never for play.
    pub(crate) fn with_mark(&self, cell: Cell, mark: Mark) -> Board {
        let mut next = *self;
        match mark {
            Mark::X => next.x |= cell.bit(),
            Mark::O => next.o |= cell.bit(),
        }
        next
    }

    pub fn transform(&self, sym: Symmetry) -> Board {
        Board {
            x: sym.apply_set(CellSet(self.x)).bits(),
            o: sym.apply_set(CellSet(self.o)).bits(),
            first: self.first,
        }
    }

    /// The 8 images under the square's symmetries, identity first.
    pub fn d4_transforms(&self) -> [Board; 8] {
        let mut out = [*self; 8];
        for sym in Symmetry::all() {
            out[sym.index()] = self.transform(sym);
        }
        out
    }

    /// Multi-line rendering for terminals.
    pub fn pretty(&self) -> String {
        let mut s = String::new();
        for row in 0..3 {
            if row > 0 {
                s.push_str("---+---+---\n");
            }
            for col in 0..3 {
                let cell = Cell((row * 3 + col) as u8);
                let ch = self.get(cell).map_or(' ', Mark::as_char);
                s.push(' ');
                s.push(ch);
                s.push(' ');
                if col < 2 {
                    s.push('|');
                }
            }
            s.push('\n');
        }
        s
    }
}

fn parse_cells(s: &str) -> Result<(CellSet, CellSet), BoardError> {
    let chars: Vec<char> = s.trim().chars().collect();
    if chars.len() != 9 {
        return Err(BoardError::Parse(format!(
            "expected 9 characters, got {}",
            chars.len()
        )));
    }
    let (mut x, mut o) = (CellSet::EMPTY, CellSet::EMPTY);
    for (i, ch) in chars.into_iter().enumerate() {
        match ch {
            'X' | 'x' => x.insert(Cell(i as u8)),
            'O' | 'o' => o.insert(Cell(i as u8)),
            '.' => {}
            other => return Err(BoardError::Parse(format!("unexpected character {other:?}"))),
        }
    }
    Ok((x, o))
}

impl Default for Board {
    fn default() -> Self {
        Board::new(Mark::X)
    }
}

impl fmt::Display for Board {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for cell in Cell::ALL {
            let ch = self.get(cell).map_or('.', Mark::as_char);
            write!(f, "{ch}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Board {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Board({self}, first={})", self.first)
    }
}

impl FromStr for Board {
    type Err = BoardError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Board::parse(s)
    }
}

fn expect_class(cell: Cell, expected: CellClass) -> Result<(), BoardError> {
    if cell.class() == expected {
        Ok(())
    } else {
        Err(BoardError::ClassMismatch { cell, expected })
    }
}

pub fn diag_opposite(corner: Cell) -> Result<Cell, BoardError> {
    expect_class(corner, CellClass::Corner)?;
    Ok(Cell(8 - corner.0))
}

/// King-move adjacency. A cell is not adjacent to itself.
pub fn adjacent(a: Cell, b: Cell) -> bool {
    a.chebyshev(b) == 1
}

pub fn corners_adjacent_to(edge: Cell) -> Result<CellSet, BoardError> {
    expect_class(edge, CellClass::Edge)?;
    Ok(Cell::CORNERS
        .into_iter()
        .filter(|&c| adjacent(c, edge))
        .collect())
}

/// The two edges one king-step away from `edge`.
pub fn nearer_edges(edge: Cell) -> Result<CellSet, BoardError> {
    expect_class(edge, CellClass::Edge)?;
    Ok(Cell::EDGES
        .into_iter()
        .filter(|&e| adjacent(e, edge))
        .collect())
}

pub fn opposite_edge(edge: Cell) -> Result<Cell, BoardError> {
    expect_class(edge, CellClass::Edge)?;
    Ok(Cell(8 - edge.0))
}

/// The corner touching both neighbouring edges. The centre touches them too
/// but is not a corner.
pub fn shared_corner(a: Cell, b: Cell) -> Result<Cell, BoardError> {
    expect_class(a, CellClass::Edge)?;
    expect_class(b, CellClass::Edge)?;
    Cell::CORNERS
        .into_iter()
        .find(|&c| adjacent(c, a) && adjacent(c, b))
        .ok_or(BoardError::NotNeighbours(a, b))
}

/// Candidates minimising the summed Euclidean distance to every anchor.
/// Ties are all returned.
pub fn min_distance_corners(anchors: CellSet, candidates: CellSet) -> CellSet {
    let score = |c: Cell| anchors.iter().map(|a| c.euclidean(a)).sum::<f64>();
    let best = candidates.iter().map(score).fold(f64::INFINITY, f64::min);
    candidates
        .iter()
        .filter(|&c| score(c) - best < 1e-9)
        .collect()
}
