# Training, Evaluation and Data Services
