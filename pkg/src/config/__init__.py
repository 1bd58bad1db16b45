"""
Config modules - Các module quản lý cấu hình
"""
