"""
脚本模块
"""
