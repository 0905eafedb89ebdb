"""
工具函数模块

提供网格、随机种子派生和确定性并行重复执行
"""
