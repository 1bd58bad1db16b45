"""
UI modules - Giao diện dòng lệnh
(UI modules - Command-line interface)
"""
