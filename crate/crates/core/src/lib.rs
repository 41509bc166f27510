pub mod category;
pub mod constructions;
pub mod error;
pub mod exact;
pub mod instances;
pub mod karoubi;
pub mod limits;
pub mod matrix;
pub mod normal_form;
pub mod opposite;
pub mod ring;
pub mod stability;
