//! Support code for the `dca` command-line tool: the boundary-data
//! expression language and the SVG heat-map writer.

pub mod expr;
pub mod svg;
