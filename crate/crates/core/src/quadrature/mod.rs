pub mod adaptive;
pub mod carleson;
pub mod cubature;
pub mod norms;

pub use adaptive::{integrate, integrate_line, integrate_semi_infinite, Quad1d, Tolerance};
pub use carleson::{carleson_test, dyadic_squares, CarlesonReport, CarlesonSquare, Measure};
pub use cubature::{integrate_cells, Cell, Quad2d};
pub use norms::{area_norm2, inner_product_line, line_norm2, NormReport};
