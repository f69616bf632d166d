pub mod numerov;
