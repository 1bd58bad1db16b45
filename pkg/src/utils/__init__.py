"""
Utils modules - Các module tiện ích (logging, file I/O, worker pool)
"""
