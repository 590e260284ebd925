# Numerical Models
