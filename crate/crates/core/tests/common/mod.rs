pub mod corridors;
pub mod oracle;
